//! Line-oriented `key = value` run configuration with `[section]` headers.
//!
//! The format is deliberately rigid: full-line `#` comments only, every key
//! must belong to the section it appears in, and unknown or duplicate keys
//! are hard errors. A config document that parses today must mean the same
//! thing after the codebase grows new knobs, so drift protection beats
//! leniency here.
//!
//! ```text
//! [model]
//! dim = 3
//! delta = -1
//!
//! [density]
//! family = uniform
//!
//! [velocity]
//! family = uniform
//! amplitude = 0
//!
//! [numerics]
//! shell_count = 100
//! dt = 1e-4
//! t_end = 2
//! ```

use crate::error::{Error, Result};
use crate::lagrangian::DetectionThresholds;
use crate::model::{ForceSign, ModelParams, ProfileFamily, ProfileSpec};

/// Default sampling resolution for profiles built from a config document.
pub const DEFAULT_PROFILE_NODES: usize = 2001;

/// A fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub density: ProfileSpec,
    pub density_nodes: usize,
    pub velocity: ProfileSpec,
    pub velocity_nodes: usize,
    pub shell_count: usize,
    pub dt: f64,
    pub t_end: f64,
    pub thresholds: DetectionThresholds,
    pub trace_path: String,
    pub report_path: String,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("model", &["dim", "delta", "K", "gamma", "alpha"]),
    (
        "density",
        &["family", "radius", "amplitude", "width", "points", "nodes"],
    ),
    (
        "velocity",
        &["family", "radius", "amplitude", "width", "points", "nodes"],
    ),
    (
        "numerics",
        &[
            "shell_count",
            "dt",
            "t_end",
            "escape_threshold",
            "min_radius_fraction",
        ],
    ),
    ("output", &["trace", "report"]),
];

struct Entry {
    line: usize,
    section: &'static str,
    key: &'static str,
    value: String,
}

/// Raw scan: section tracking, key legality, duplicate rejection.
fn scan(text: &str) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    let mut section: Option<&'static str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| Error::ConfigSyntax {
                line,
                message: format!("unterminated section header `{trimmed}`"),
            })?;
            let known = SECTIONS
                .iter()
                .find(|(s, _)| *s == name.trim())
                .map(|(s, _)| *s);
            section = Some(known.ok_or_else(|| Error::ConfigSyntax {
                line,
                message: format!("unknown section `[{}]`", name.trim()),
            })?);
            continue;
        }
        let (key_part, value_part) =
            trimmed.split_once('=').ok_or_else(|| Error::ConfigSyntax {
                line,
                message: format!("expected `key = value`, got `{trimmed}`"),
            })?;
        let key = key_part.trim();
        let value = value_part.trim();
        let section = section.ok_or_else(|| Error::ConfigSyntax {
            line,
            message: format!("key `{key}` appears before any [section] header"),
        })?;
        let keys = SECTIONS.iter().find(|(s, _)| *s == section).unwrap().1;
        let key = *keys
            .iter()
            .find(|&&k| k == key)
            .ok_or_else(|| Error::ConfigUnknownKey {
                line,
                key: key.to_string(),
            })?;
        if value.is_empty() {
            return Err(Error::ConfigSyntax {
                line,
                message: format!("key `{key}` has an empty value"),
            });
        }
        if entries.iter().any(|e| e.section == section && e.key == key) {
            return Err(Error::ConfigSyntax {
                line,
                message: format!("duplicate key `{key}` in section [{section}]"),
            });
        }
        entries.push(Entry {
            line,
            section,
            key,
            value: value.to_string(),
        });
    }
    Ok(entries)
}

struct Lookup<'a> {
    entries: &'a [Entry],
}

impl<'a> Lookup<'a> {
    fn get(&self, section: &str, key: &str) -> Option<&'a Entry> {
        self.entries
            .iter()
            .find(|e| e.section == section && e.key == key)
    }

    fn required(&self, section: &'static str, key: &'static str) -> Result<&'a Entry> {
        self.get(section, key).ok_or(Error::ConfigMissing {
            key: format!("{section}.{key}"),
        })
    }

    fn f64(&self, section: &'static str, key: &'static str) -> Result<Option<(f64, usize)>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => {
                let v: f64 = e.value.parse().map_err(|_| Error::ConfigValue {
                    line: e.line,
                    key: key.to_string(),
                    message: format!("`{}` is not a number", e.value),
                })?;
                if !v.is_finite() {
                    return Err(Error::ConfigValue {
                        line: e.line,
                        key: key.to_string(),
                        message: format!("`{}` is not finite", e.value),
                    });
                }
                Ok(Some((v, e.line)))
            }
        }
    }

    fn usize_positive(
        &self,
        section: &'static str,
        key: &'static str,
    ) -> Result<Option<(usize, usize)>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => {
                let v: i64 = e.value.parse().map_err(|_| Error::ConfigValue {
                    line: e.line,
                    key: key.to_string(),
                    message: format!("`{}` is not an integer", e.value),
                })?;
                if v <= 0 {
                    return Err(Error::ConfigValue {
                        line: e.line,
                        key: key.to_string(),
                        message: format!("must be positive, got {v}"),
                    });
                }
                Ok(Some((v as usize, e.line)))
            }
        }
    }
}

fn positive_f64(entry: Option<(f64, usize)>, key: &str) -> Result<Option<(f64, usize)>> {
    if let Some((v, line)) = entry {
        if v <= 0.0 {
            return Err(Error::ConfigValue {
                line,
                key: key.to_string(),
                message: format!("must be positive, got {v}"),
            });
        }
    }
    Ok(entry)
}

/// `r:v, r:v, ...` anchor list for the piecewise family.
fn parse_points(entry: &Entry) -> Result<Vec<(f64, f64)>> {
    let mut points = Vec::new();
    for chunk in entry.value.split(',') {
        let (r, v) = chunk.split_once(':').ok_or_else(|| Error::ConfigValue {
            line: entry.line,
            key: entry.key.to_string(),
            message: format!("expected `radius:value`, got `{}`", chunk.trim()),
        })?;
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::ConfigValue {
                line: entry.line,
                key: entry.key.to_string(),
                message: format!("`{}` is not a number", s.trim()),
            })
        };
        points.push((parse(r)?, parse(v)?));
    }
    Ok(points)
}

fn profile_spec(lookup: &Lookup, section: &'static str) -> Result<(ProfileSpec, usize)> {
    let family_entry = lookup.required(section, "family")?;
    let radius = positive_f64(lookup.f64(section, "radius")?, "radius")?
        .map(|(v, _)| v)
        .unwrap_or(1.0);
    // velocity profiles describe a signed radial component, so amplitude may
    // be negative; the zero default is the resting field
    let default_amplitude = if section == "density" { 1.0 } else { 0.0 };
    let amplitude = lookup
        .f64(section, "amplitude")?
        .map(|(v, _)| v)
        .unwrap_or(default_amplitude);
    let width = lookup.f64(section, "width")?;
    let points = lookup.get(section, "points");
    let nodes = lookup
        .usize_positive(section, "nodes")?
        .map(|(v, _)| v)
        .unwrap_or(DEFAULT_PROFILE_NODES);
    if nodes < 3 {
        return Err(Error::ConfigValue {
            line: lookup.get(section, "nodes").unwrap().line,
            key: "nodes".to_string(),
            message: format!("need at least 3 sampling nodes, got {nodes}"),
        });
    }

    let reject_extra = |name: &str, present: bool, family: &str| -> Result<()> {
        if present {
            return Err(Error::ConfigValue {
                line: family_entry.line,
                key: name.to_string(),
                message: format!("`{name}` is not meaningful for family = {family}"),
            });
        }
        Ok(())
    };

    let family = match family_entry.value.as_str() {
        "uniform" => {
            reject_extra("width", width.is_some(), "uniform")?;
            reject_extra("points", points.is_some(), "uniform")?;
            ProfileFamily::Uniform { amplitude }
        }
        "parabolic" => {
            reject_extra("width", width.is_some(), "parabolic")?;
            reject_extra("points", points.is_some(), "parabolic")?;
            ProfileFamily::Parabolic { amplitude }
        }
        "gaussian" => {
            reject_extra("points", points.is_some(), "gaussian")?;
            let (width, line) = width.ok_or(Error::ConfigMissing {
                key: format!("{section}.width"),
            })?;
            if width <= 0.0 {
                return Err(Error::ConfigValue {
                    line,
                    key: "width".to_string(),
                    message: format!("must be positive, got {width}"),
                });
            }
            ProfileFamily::Gaussian { amplitude, width }
        }
        "piecewise" => {
            reject_extra("width", width.is_some(), "piecewise")?;
            let entry = points.ok_or(Error::ConfigMissing {
                key: format!("{section}.points"),
            })?;
            ProfileFamily::PiecewiseLinear {
                points: parse_points(entry)?,
            }
        }
        other => {
            return Err(Error::ConfigValue {
                line: family_entry.line,
                key: "family".to_string(),
                message: format!(
                    "unknown family `{other}` (expected uniform, parabolic, gaussian, \
                     or piecewise)"
                ),
            })
        }
    };
    Ok((ProfileSpec { family, radius }, nodes))
}

/// Parse and validate a config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let entries = scan(text)?;
    let lookup = Lookup { entries: &entries };

    let dim_entry = lookup.required("model", "dim")?;
    let dim: usize = dim_entry.value.parse().map_err(|_| Error::ConfigValue {
        line: dim_entry.line,
        key: "dim".to_string(),
        message: format!("`{}` is not a positive integer", dim_entry.value),
    })?;
    let delta_entry = lookup.required("model", "delta")?;
    let delta: i64 = delta_entry.value.parse().map_err(|_| Error::ConfigValue {
        line: delta_entry.line,
        key: "delta".to_string(),
        message: format!("`{}` is not an integer", delta_entry.value),
    })?;
    let force = ForceSign::from_int(delta).map_err(|e| Error::ConfigValue {
        line: delta_entry.line,
        key: "delta".to_string(),
        message: e.to_string(),
    })?;
    let pressure_const = lookup.f64("model", "K")?.map(|(v, _)| v).unwrap_or(0.0);
    let gamma = lookup.f64("model", "gamma")?.map(|(v, _)| v).unwrap_or(2.0);
    let mut params =
        ModelParams::new(dim, force, pressure_const, gamma).map_err(|e| Error::ConfigValue {
            line: dim_entry.line,
            key: "dim".to_string(),
            message: e.to_string(),
        })?;
    if let Some((alpha, line)) = lookup.f64("model", "alpha")? {
        params = params
            .with_coupling(alpha)
            .map_err(|e| Error::ConfigValue {
                line,
                key: "alpha".to_string(),
                message: e.to_string(),
            })?;
    }

    let (density, density_nodes) = profile_spec(&lookup, "density")?;
    let (velocity, velocity_nodes) = profile_spec(&lookup, "velocity")?;

    let (shell_count, _) =
        lookup
            .usize_positive("numerics", "shell_count")?
            .ok_or(Error::ConfigMissing {
                key: "numerics.shell_count".to_string(),
            })?;
    let dt = positive_f64(lookup.f64("numerics", "dt")?, "dt")?
        .ok_or(Error::ConfigMissing {
            key: "numerics.dt".to_string(),
        })?
        .0;
    let t_end = positive_f64(lookup.f64("numerics", "t_end")?, "t_end")?
        .ok_or(Error::ConfigMissing {
            key: "numerics.t_end".to_string(),
        })?
        .0;
    let defaults = DetectionThresholds::default();
    let escape = positive_f64(
        lookup.f64("numerics", "escape_threshold")?,
        "escape_threshold",
    )?
    .map(|(v, _)| v)
    .unwrap_or(defaults.divergence_escape);
    let min_fraction = match lookup.f64("numerics", "min_radius_fraction")? {
        None => defaults.min_radius_fraction,
        Some((v, line)) => {
            if !(0.0 < v && v < 1.0) {
                return Err(Error::ConfigValue {
                    line,
                    key: "min_radius_fraction".to_string(),
                    message: format!("must lie strictly between 0 and 1, got {v}"),
                });
            }
            v
        }
    };

    let trace_path = lookup
        .get("output", "trace")
        .map(|e| e.value.clone())
        .unwrap_or_else(|| "trace.csv".to_string());
    let report_path = lookup
        .get("output", "report")
        .map(|e| e.value.clone())
        .unwrap_or_else(|| "report.txt".to_string());

    Ok(RunConfig {
        params,
        density,
        density_nodes,
        velocity,
        velocity_nodes,
        shell_count,
        dt,
        t_end,
        thresholds: DetectionThresholds {
            divergence_escape: escape,
            min_radius_fraction: min_fraction,
        },
        trace_path,
        report_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[model]
dim = 3
delta = -1
K = 0

[density]
family = uniform

[velocity]
family = uniform
amplitude = 0

[numerics]
shell_count = 100
dt = 1e-4
t_end = 2
";

    #[test]
    fn minimal_document_round_trips() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.params.dim, 3);
        assert_eq!(cfg.params.force, ForceSign::Attractive);
        assert_eq!(cfg.params.pressure_const, 0.0);
        assert_eq!(cfg.shell_count, 100);
        assert_eq!(cfg.dt, 1e-4);
        assert_eq!(cfg.t_end, 2.0);
        assert_eq!(
            cfg.density.family,
            ProfileFamily::Uniform { amplitude: 1.0 }
        );
        assert_eq!(cfg.density.radius, 1.0);
        assert_eq!(
            cfg.velocity.family,
            ProfileFamily::Uniform { amplitude: 0.0 }
        );
        assert_eq!(cfg.thresholds, DetectionThresholds::default());
        assert_eq!(cfg.trace_path, "trace.csv");
        assert_eq!(cfg.report_path, "report.txt");
    }

    #[test]
    fn negative_shell_count_names_the_key() {
        let doc = MINIMAL.replace("shell_count = 100", "shell_count = -5");
        match parse_config(&doc).unwrap_err() {
            Error::ConfigValue { key, line, .. } => {
                assert_eq!(key, "shell_count");
                assert_eq!(line, 14);
            }
            other => panic!("expected ConfigValue, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_a_hard_error() {
        let doc = format!("{MINIMAL}foo = 1\n");
        match parse_config(&doc).unwrap_err() {
            Error::ConfigUnknownKey { key, line } => {
                assert_eq!(key, "foo");
                assert_eq!(line, 17);
            }
            other => panic!("expected ConfigUnknownKey, got {other:?}"),
        }
    }

    #[test]
    fn unknown_section_is_a_hard_error() {
        let doc = format!("{MINIMAL}\n[plotting]\ncolor = red\n");
        match parse_config(&doc).unwrap_err() {
            Error::ConfigSyntax { line, message } => {
                assert_eq!(line, 18);
                assert!(message.contains("plotting"), "{message}");
            }
            other => panic!("expected ConfigSyntax, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let doc = MINIMAL.replace("dt = 1e-4", "dt 1e-4");
        match parse_config(&doc).unwrap_err() {
            Error::ConfigSyntax { line, .. } => assert_eq!(line, 15),
            other => panic!("expected ConfigSyntax, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let doc = format!("{MINIMAL}t_end = 3\n");
        match parse_config(&doc).unwrap_err() {
            Error::ConfigSyntax { line, message } => {
                assert_eq!(line, 17);
                assert!(message.contains("duplicate"), "{message}");
            }
            other => panic!("expected ConfigSyntax, got {other:?}"),
        }
    }

    #[test]
    fn missing_required_keys_are_named_with_their_section() {
        let doc = MINIMAL.replace("dt = 1e-4\n", "");
        match parse_config(&doc).unwrap_err() {
            Error::ConfigMissing { key } => assert_eq!(key, "numerics.dt"),
            other => panic!("expected ConfigMissing, got {other:?}"),
        }
    }

    #[test]
    fn keys_before_a_section_header_are_rejected() {
        match parse_config("dim = 3\n").unwrap_err() {
            Error::ConfigSyntax { line, .. } => assert_eq!(line, 1),
            other => panic!("expected ConfigSyntax, got {other:?}"),
        }
    }

    #[test]
    fn piecewise_points_parse_and_misuse_is_rejected() {
        let doc = MINIMAL.replace(
            "[velocity]\nfamily = uniform\namplitude = 0",
            "[velocity]\nfamily = piecewise\npoints = 0:0, 1:-1",
        );
        let cfg = parse_config(&doc).unwrap();
        assert_eq!(
            cfg.velocity.family,
            ProfileFamily::PiecewiseLinear {
                points: vec![(0.0, 0.0), (1.0, -1.0)]
            }
        );

        // width on a uniform family is config drift, not a silent no-op
        let doc = MINIMAL.replace(
            "[density]\nfamily = uniform",
            "[density]\nfamily = uniform\nwidth = 0.5",
        );
        match parse_config(&doc).unwrap_err() {
            Error::ConfigValue { key, .. } => assert_eq!(key, "width"),
            other => panic!("expected ConfigValue, got {other:?}"),
        }
    }

    #[test]
    fn gaussian_family_requires_width() {
        let doc = MINIMAL.replace(
            "[density]\nfamily = uniform",
            "[density]\nfamily = gaussian",
        );
        match parse_config(&doc).unwrap_err() {
            Error::ConfigMissing { key } => assert_eq!(key, "density.width"),
            other => panic!("expected ConfigMissing, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let doc = format!("# run description\n\n{MINIMAL}");
        assert!(parse_config(&doc).is_ok());
    }

    #[test]
    fn delta_outside_the_sign_set_is_rejected() {
        let doc = MINIMAL.replace("delta = -1", "delta = 2");
        match parse_config(&doc).unwrap_err() {
            Error::ConfigValue { key, .. } => assert_eq!(key, "delta"),
            other => panic!("expected ConfigValue, got {other:?}"),
        }
    }
}
