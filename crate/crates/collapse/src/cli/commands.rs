//! Subcommand bodies. Each returns the finished text document so tests can
//! assert on output without spawning processes; `main` only prints and maps
//! errors to exit codes.

use std::fmt::Write as _;
use std::path::Path;

use crate::cli::config::{parse_config, RunConfig};
use crate::cli::{fmt_f64, fmt_sig};
use crate::error::{Error, Result};
use crate::functionals;
use crate::greens;
use crate::lagrangian::{self, DivergenceTrace, SimulationReport};
use crate::model::{build_profile, ModelParams, RadialProfile};
use crate::riccati::{integrate_comparison, universal_cap, RiccatiBound};

/// Blowup-time predictions from the comparison curves, without running any
/// simulation.
///
/// `T_integration` is the escape time of the volume-averaged curve (only
/// defined for the attractive force), `T_pointwise` the center-curve time
/// (only for contracting data, H0 < 0), and `cap` the data-independent
/// ceiling `sqrt(volume / (coupling * mass)) * pi` that every integration
/// prediction stays under.
pub fn cmd_predict(params: &ModelParams, h0: f64, volume: f64, mass: f64) -> Result<String> {
    if !volume.is_finite() || volume <= 0.0 {
        return Err(Error::domain(
            "predict",
            format!("volume must be positive, got {volume}"),
        ));
    }
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::domain(
            "predict",
            format!("mass must be positive, got {mass}"),
        ));
    }
    let forcing = params.coupling * mass;
    let t_integration = match params.force {
        crate::model::ForceSign::Attractive => {
            RiccatiBound::integration(h0, volume, forcing)?.blowup_time()
        }
        _ => None,
    };
    let t_pointwise = RiccatiBound::pointwise(h0, params.dim)?.blowup_time();
    let cap = universal_cap(volume, forcing)?;

    let mut out = String::new();
    writeln!(out, "T_integration = {}", opt_sig(t_integration)).unwrap();
    writeln!(out, "T_pointwise = {}", opt_sig(t_pointwise)).unwrap();
    writeln!(out, "cap = {}", fmt_sig(cap, 12)).unwrap();
    Ok(out)
}

fn opt_sig(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_sig(v, 12),
        None => "none".to_string(),
    }
}

/// Which comparison curve `riccati` dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Integration,
    Pointwise,
}

/// Closed form vs numeric integration of one comparison curve, dumped as
/// CSV `t,closed,numeric,abs_diff`. The closed-form column prints `nan`
/// past its singularity; an escape of the numeric curve is appended as a
/// trailing `# escape_time` comment.
#[allow(clippy::too_many_arguments)]
pub fn cmd_riccati(
    kind: CurveKind,
    h0: f64,
    volume: f64,
    forcing: f64,
    dim: usize,
    dt: f64,
    t_end: f64,
    escape_threshold: f64,
) -> Result<String> {
    let bound = match kind {
        CurveKind::Integration => RiccatiBound::integration(h0, volume, forcing)?,
        CurveKind::Pointwise => RiccatiBound::pointwise(h0, dim)?,
    };
    let trace = integrate_comparison(&bound, None, dt, t_end, escape_threshold)?;
    let mut out = String::from("t,closed,numeric,abs_diff\n");
    for (&t, &numeric) in trace.times.iter().zip(&trace.values) {
        let closed = bound.eval(t).unwrap_or(f64::NAN);
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(t),
            fmt_f64(closed),
            fmt_f64(numeric),
            fmt_f64((closed - numeric).abs()),
        )
        .unwrap();
    }
    if let Some(t) = trace.escape_time {
        writeln!(out, "# escape_time = {}", fmt_f64(t)).unwrap();
    }
    Ok(out)
}

/// Run the simulation described by a config file; write the trace CSV and
/// the report document to the configured paths and return the report text.
pub fn cmd_simulate(config_path: &str) -> Result<String> {
    let cfg = load_config(config_path)?;
    let density = build_profile(&cfg.density, cfg.density_nodes)?;
    let velocity = build_profile(&cfg.velocity, cfg.velocity_nodes)?;
    let initial = lagrangian::init_shells(&density, &velocity, cfg.shell_count, cfg.params.dim)?;
    let (trace, report) =
        lagrangian::run_simulation(&initial, &cfg.params, cfg.dt, cfg.t_end, &cfg.thresholds)?;

    write_text(&cfg.trace_path, &render_trace_csv(&trace))?;
    let doc = render_report(&report);
    write_text(&cfg.report_path, &doc)?;
    Ok(doc)
}

/// Evaluate the pressure functional for the configured density and compare
/// it against the force threshold `-delta * coupling * mass`.
///
/// Absent domain ends default to the full support `[0, R]`. In 1-D the
/// profile describes the right half of a symmetric interval, so every
/// domain stands for the mirrored pair.
pub fn cmd_functional(
    config_path: &str,
    epsilon: f64,
    domain_lo: Option<f64>,
    domain_hi: Option<f64>,
) -> Result<String> {
    let cfg = load_config(config_path)?;
    let density = build_profile(&cfg.density, cfg.density_nodes)?;
    let domain = (
        domain_lo.unwrap_or(0.0),
        domain_hi.unwrap_or_else(|| density.support_radius()),
    );
    let value = functionals::pressure_functional(
        &density,
        cfg.params.pressure_const,
        cfg.params.adiabatic_exp,
        domain,
        cfg.params.dim,
    )?;
    let mass = functionals::total_mass(&density, cfg.params.dim)?;
    let check = functionals::check_functional(value, epsilon, &cfg.params, mass)?;

    let mut out = String::new();
    writeln!(out, "value = {}", fmt_f64(check.value)).unwrap();
    writeln!(out, "threshold = {}", fmt_f64(check.threshold)).unwrap();
    writeln!(out, "epsilon = {}", fmt_f64(check.epsilon)).unwrap();
    writeln!(out, "satisfied = {}", check.satisfied).unwrap();
    Ok(out)
}

/// Tabulate the radial kernel, and with a config also the enclosed-density
/// integral and radial acceleration of the configured density (plus the
/// 1-D potential where it is defined). CSV on stdout.
pub fn cmd_greens(
    dim: usize,
    r_min: Option<f64>,
    r_max: f64,
    rows: usize,
    config_path: Option<&str>,
) -> Result<String> {
    if r_max <= 0.0 || !r_max.is_finite() {
        return Err(Error::domain(
            "greens table",
            format!("r_max must be positive, got {r_max}"),
        ));
    }
    if rows < 2 {
        return Err(Error::domain(
            "greens table",
            format!("need at least 2 rows, got {rows}"),
        ));
    }
    // the kernel is singular at the origin for dim >= 2, so the default
    // start sits one grid spacing out
    let r_min = r_min.unwrap_or(if dim == 1 { 0.0 } else { r_max / rows as f64 });
    if !r_min.is_finite() || r_min < 0.0 || r_min >= r_max {
        return Err(Error::domain(
            "greens table",
            format!("r_min must satisfy 0 <= r_min < r_max, got {r_min}"),
        ));
    }

    let cfg = match config_path {
        Some(path) => Some(load_config(path)?),
        None => None,
    };
    let density = match &cfg {
        Some(c) => {
            if c.params.dim != dim {
                return Err(Error::domain(
                    "greens table",
                    format!(
                        "config dimension {} does not match --dim {dim}",
                        c.params.dim
                    ),
                ));
            }
            Some(build_profile(&c.density, c.density_nodes)?)
        }
        None => None,
    };
    let with_potential = dim == 1 && density.is_some();

    let mut out = String::from("r,kernel");
    if density.is_some() {
        out.push_str(",enclosed,acceleration");
    }
    if with_potential {
        out.push_str(",potential");
    }
    out.push('\n');

    let radii: Vec<f64> = (0..rows)
        .map(|i| {
            if i + 1 == rows {
                r_max
            } else {
                r_min + (r_max - r_min) * i as f64 / (rows - 1) as f64
            }
        })
        .collect();
    let potential = match (&density, with_potential) {
        (Some(d), true) => Some(greens::potential_1d(d, &radii)?),
        _ => None,
    };
    for (i, &r) in radii.iter().enumerate() {
        let kernel = greens::greens_function(r, dim)?;
        write!(out, "{},{}", fmt_f64(r), fmt_f64(kernel)).unwrap();
        if let (Some(d), Some(c)) = (&density, &cfg) {
            let enclosed = greens::enclosed_integral(r, d, dim)?;
            let accel = greens::radial_acceleration(r, d, &c.params)?;
            write!(out, ",{},{}", fmt_f64(enclosed), fmt_f64(accel)).unwrap();
        }
        if let Some(p) = &potential {
            write!(out, ",{}", fmt_f64(p.values[i])).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

fn load_config(path: &str) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })?;
    parse_config(&text)
}

fn write_text(path: &str, content: &str) -> Result<()> {
    if let Some(parent) = Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: path.to_string(),
                source,
            })?;
        }
    }
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}

/// The flat trace file: one row per recorded sample, columns fixed so any
/// external plotter can rely on them.
pub fn render_trace_csv(trace: &DivergenceTrace) -> String {
    let mut out = String::from(
        "t,H_integrated,H_pointwise_center,tan_bound,rational_bound,support_volume,\
         frozen_volume,mass,cs_lhs,cs_rhs,min_density,max_density\n",
    );
    for k in 0..trace.times.len() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(trace.times[k]),
            fmt_f64(trace.h_integrated[k]),
            fmt_f64(trace.h_pointwise_center[k]),
            fmt_f64(trace.tan_bound[k]),
            fmt_f64(trace.rational_bound[k]),
            fmt_f64(trace.support_volume[k]),
            fmt_f64(trace.frozen_volume),
            fmt_f64(trace.mass[k]),
            fmt_f64(trace.cs_lhs[k]),
            fmt_f64(trace.cs_rhs[k]),
            fmt_f64(trace.min_density[k]),
            fmt_f64(trace.max_density[k]),
        )
        .unwrap();
    }
    out
}

/// The run report: every simulation-report field as one `key = value` line,
/// absent optionals printed as `none`.
pub fn render_report(report: &SimulationReport) -> String {
    let opt = |v: Option<f64>| -> String {
        match v {
            Some(v) => fmt_f64(v),
            None => "none".to_string(),
        }
    };
    let mut out = String::new();
    writeln!(out, "blowup_detected = {}", report.blowup_detected).unwrap();
    writeln!(out, "blowup_time = {}", opt(report.blowup_time)).unwrap();
    writeln!(
        out,
        "cause = {}",
        report
            .cause
            .map(|c| c.to_string())
            .unwrap_or_else(|| "none".to_string())
    )
    .unwrap();
    writeln!(
        out,
        "predicted_T_integration = {}",
        opt(report.predicted_t_integration)
    )
    .unwrap();
    writeln!(
        out,
        "predicted_T_pointwise = {}",
        opt(report.predicted_t_pointwise)
    )
    .unwrap();
    writeln!(
        out,
        "max_cs_violation = {}",
        fmt_f64(report.max_cs_violation)
    )
    .unwrap();
    writeln!(
        out,
        "max_riccati_residual = {}",
        fmt_f64(report.max_riccati_residual)
    )
    .unwrap();
    out
}

/// Shared support: dump a built profile for inspection (used by doc
/// examples and kept close to the other emitters).
pub fn render_profile_csv(profile: &RadialProfile) -> String {
    let mut out = String::from("r,value\n");
    for (&r, &v) in profile.nodes().iter().zip(profile.values()) {
        writeln!(out, "{},{}", fmt_f64(r), fmt_f64(v)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ForceSign;
    use std::f64::consts::PI;

    fn attractive_params() -> ModelParams {
        ModelParams::pressureless(3, ForceSign::Attractive).unwrap()
    }

    #[test]
    fn predict_prints_the_closed_form_times() {
        // unit volume, unit mass, resting data: T = sqrt(1/(4pi)) * pi/2
        let doc = cmd_predict(&attractive_params(), 0.0, 1.0, 1.0).unwrap();
        let expected = (1.0 / (4.0 * PI)).sqrt() * PI / 2.0;
        assert!(
            doc.contains(&format!("T_integration = {}", fmt_sig(expected, 12))),
            "{doc}"
        );
        assert!(doc.contains("T_pointwise = none"), "{doc}");
        let cap = (1.0 / (4.0 * PI)).sqrt() * PI;
        assert!(
            doc.contains(&format!("cap = {}", fmt_sig(cap, 12))),
            "{doc}"
        );
    }

    #[test]
    fn predict_pointwise_time_needs_contracting_data() {
        let doc = cmd_predict(&attractive_params(), -3.0, 1.0, 1.0).unwrap();
        assert!(doc.contains("T_pointwise = 1.00000000000"), "{doc}");
        let doc = cmd_predict(&attractive_params(), 1.0, 1.0, 1.0).unwrap();
        assert!(doc.contains("T_pointwise = none"), "{doc}");
    }

    #[test]
    fn predict_integration_time_is_attractive_only() {
        let params = ModelParams::pressureless(3, ForceSign::Free).unwrap();
        let doc = cmd_predict(&params, -1.0, 1.0, 1.0).unwrap();
        assert!(doc.contains("T_integration = none"), "{doc}");
    }

    #[test]
    fn riccati_dump_has_small_closed_vs_numeric_gap() {
        // blowup of this curve sits at pi/2, so a 2.0 window must escape
        let doc = cmd_riccati(CurveKind::Integration, 0.0, 1.0, 1.0, 3, 1e-3, 2.0, 1e6).unwrap();
        let mut lines = doc.lines();
        assert_eq!(lines.next().unwrap(), "t,closed,numeric,abs_diff");
        let mut saw_rows = 0;
        for line in lines {
            if line.starts_with('#') {
                assert!(line.starts_with("# escape_time = "), "{line}");
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 4);
            let t: f64 = fields[0].parse().unwrap();
            let diff: f64 = fields[3].parse().unwrap();
            if t < 0.7 {
                assert!(diff < 1e-8, "{line}");
            }
            saw_rows += 1;
        }
        assert!(saw_rows > 100);
        assert!(doc.contains("# escape_time = "), "{doc}");
    }

    #[test]
    fn greens_table_matches_direct_kernel_calls() {
        let doc = cmd_greens(3, Some(0.5), 2.0, 4, None).unwrap();
        let lines: Vec<&str> = doc.lines().collect();
        assert_eq!(lines[0], "r,kernel");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[4], "2,-0.5");
    }

    #[test]
    fn greens_table_defaults_away_from_the_singular_origin() {
        let doc = cmd_greens(2, None, 1.0, 10, None).unwrap();
        let first = doc.lines().nth(1).unwrap();
        let r: f64 = first.split(',').next().unwrap().parse().unwrap();
        assert!(r > 0.0);
    }
}
