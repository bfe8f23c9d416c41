//! Physical setup: gas law, field coupling, and radial profiles.
//!
//! The flow is an ideal compressible gas with barotropic pressure
//! `P = K rho^gamma` (`gamma = 1` is the isothermal case), optionally coupled
//! to a self-induced radial field. The coupling constant multiplies the
//! enclosed-density integral in the force law; its sign is carried separately
//! by [`ForceSign`] so attractive, free, and repulsive runs share one
//! parameter set.

use crate::error::{Error, Result};

/// Dimensions above this make `r^(dim-1)` underflow long before the solvers
/// can produce anything meaningful.
pub const MAX_DIM: usize = 64;

/// Sign of the self-induced radial force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceSign {
    Attractive,
    Free,
    Repulsive,
}

impl ForceSign {
    /// The signed factor that multiplies the field term: -1, 0, or +1.
    pub fn signum(self) -> f64 {
        match self {
            ForceSign::Attractive => -1.0,
            ForceSign::Free => 0.0,
            ForceSign::Repulsive => 1.0,
        }
    }

    pub fn from_int(value: i64) -> Result<Self> {
        match value {
            -1 => Ok(ForceSign::Attractive),
            0 => Ok(ForceSign::Free),
            1 => Ok(ForceSign::Repulsive),
            other => Err(Error::domain(
                "force sign",
                format!("must be -1, 0, or +1, got {other}"),
            )),
        }
    }
}

/// Surface area of the unit sphere in `dim` dimensions.
///
/// Computed by the two-step recurrence `w(n) = 2*pi*w(n-2)/(n-2)` from
/// `w(1) = 2`, `w(2) = 2*pi`, which stays exact in the integer/half-integer
/// gamma-function family without evaluating Gamma itself.
pub fn unit_sphere_area(dim: usize) -> Result<f64> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidDimension { dim, max: MAX_DIM });
    }
    let mut area = if dim % 2 == 1 {
        2.0
    } else {
        std::f64::consts::TAU
    };
    let mut n = 2 - dim % 2;
    while n < dim {
        area *= std::f64::consts::TAU / n as f64;
        n += 2;
    }
    Ok(area)
}

/// Default field coupling for a given dimension.
///
/// 1, 2, and 3 dimensions use the conventional constants 1, 2*pi, 4*pi that
/// normalize the radial kernel; higher dimensions fall back to the
/// unit-sphere surface area. Note the 1-D value is 1 even though the
/// unit-sphere measure there is 2: the force normalization and the geometric
/// volume weight are independent constants and must not be conflated.
pub fn default_coupling(dim: usize) -> Result<f64> {
    match dim {
        0 => Err(Error::InvalidDimension { dim, max: MAX_DIM }),
        1 => Ok(1.0),
        2 => Ok(std::f64::consts::TAU),
        3 => Ok(4.0 * std::f64::consts::PI),
        n => unit_sphere_area(n),
    }
}

/// Barotropic pressure `K * rho^gamma`.
pub fn pressure(rho: f64, pressure_const: f64, adiabatic_exp: f64) -> Result<f64> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::domain(
            "pressure",
            format!("density must be finite and nonnegative, got {rho}"),
        ));
    }
    if !adiabatic_exp.is_finite() || adiabatic_exp < 1.0 {
        return Err(Error::domain(
            "pressure",
            format!("adiabatic exponent must be >= 1, got {adiabatic_exp}"),
        ));
    }
    if !pressure_const.is_finite() || pressure_const < 0.0 {
        return Err(Error::domain(
            "pressure",
            format!("pressure constant must be nonnegative, got {pressure_const}"),
        ));
    }
    Ok(pressure_const * rho.powf(adiabatic_exp))
}

/// Full parameter set for one run.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    pub dim: usize,
    pub force: ForceSign,
    /// Gas constant `K` in `P = K rho^gamma`. Zero switches pressure off.
    pub pressure_const: f64,
    /// Adiabatic exponent `gamma`, at least 1.
    pub adiabatic_exp: f64,
    /// Field coupling; defaults to [`default_coupling`] for the dimension.
    pub coupling: f64,
}

impl ModelParams {
    pub fn new(
        dim: usize,
        force: ForceSign,
        pressure_const: f64,
        adiabatic_exp: f64,
    ) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidDimension { dim, max: MAX_DIM });
        }
        if !pressure_const.is_finite() || pressure_const < 0.0 {
            return Err(Error::domain(
                "model",
                format!("pressure constant must be finite and nonnegative, got {pressure_const}"),
            ));
        }
        if !adiabatic_exp.is_finite() || adiabatic_exp < 1.0 {
            return Err(Error::domain(
                "model",
                format!("adiabatic exponent must be finite and >= 1, got {adiabatic_exp}"),
            ));
        }
        Ok(ModelParams {
            dim,
            force,
            pressure_const,
            adiabatic_exp,
            coupling: default_coupling(dim)?,
        })
    }

    /// Replace the default coupling, e.g. to explore a rescaled field.
    pub fn with_coupling(mut self, coupling: f64) -> Result<Self> {
        if !coupling.is_finite() || coupling <= 0.0 {
            return Err(Error::domain(
                "model",
                format!("coupling must be finite and positive, got {coupling}"),
            ));
        }
        self.coupling = coupling;
        Ok(self)
    }

    /// Convenience for the common pressureless setup.
    pub fn pressureless(dim: usize, force: ForceSign) -> Result<Self> {
        ModelParams::new(dim, force, 0.0, 2.0)
    }
}

/// A scalar field sampled on radial nodes `0 = r_0 < r_1 < ... < r_m`.
///
/// Values between nodes are linearly interpolated; queries outside the node
/// range clamp to the end values.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::domain(
                "profile",
                format!("need at least 2 nodes, got {}", nodes.len()),
            ));
        }
        if nodes.len() != values.len() {
            return Err(Error::domain(
                "profile",
                format!("{} nodes but {} values", nodes.len(), values.len()),
            ));
        }
        if nodes[0] != 0.0 {
            return Err(Error::domain(
                "profile",
                format!("first node must sit at r = 0, got {}", nodes[0]),
            ));
        }
        for pair in nodes.windows(2) {
            if pair[1].partial_cmp(&pair[0]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::domain(
                    "profile",
                    format!(
                        "nodes must be strictly increasing, got {} then {}",
                        pair[0], pair[1]
                    ),
                ));
            }
        }
        if nodes.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("profile", "nodes and values must be finite"));
        }
        Ok(RadialProfile { nodes, values })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor requires at least two nodes
    }

    /// Outermost node radius.
    pub fn support_radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Linear interpolation with clamping outside the node range.
    pub fn value_at(&self, r: f64) -> f64 {
        crate::numerics::interp_clamped(&self.nodes, &self.values, r)
    }
}

/// Closed-form profile families used to seed initial data.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileFamily {
    /// Constant `amplitude` on the whole support.
    Uniform { amplitude: f64 },
    /// `amplitude * (1 - (r/R)^2)`, vanishing at the support edge.
    Parabolic { amplitude: f64 },
    /// `amplitude * exp(-(r/width)^2)`, truncated at the support edge.
    Gaussian { amplitude: f64, width: f64 },
    /// Linear interpolation through `(radius, value)` anchor points.
    PiecewiseLinear { points: Vec<(f64, f64)> },
}

/// A family plus the support radius it is sampled on.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub family: ProfileFamily,
    pub radius: f64,
}

/// Sample a profile family on `node_count` uniform nodes over `[0, radius]`.
pub fn build_profile(spec: &ProfileSpec, node_count: usize) -> Result<RadialProfile> {
    if node_count < 3 {
        return Err(Error::domain(
            "profile",
            format!("need at least 3 nodes, got {node_count}"),
        ));
    }
    if !spec.radius.is_finite() || spec.radius <= 0.0 {
        return Err(Error::domain(
            "profile",
            format!("support radius must be positive, got {}", spec.radius),
        ));
    }
    if let ProfileFamily::Gaussian { width, .. } = spec.family {
        if !width.is_finite() || width <= 0.0 {
            return Err(Error::domain(
                "profile",
                format!("gaussian width must be positive, got {width}"),
            ));
        }
    }
    if let ProfileFamily::PiecewiseLinear { points } = &spec.family {
        if points.len() < 2 {
            return Err(Error::domain(
                "profile",
                "piecewise family needs at least 2 anchor points",
            ));
        }
        for pair in points.windows(2) {
            if pair[1].0.partial_cmp(&pair[0].0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::domain(
                    "profile",
                    "piecewise anchors must have strictly increasing radii",
                ));
            }
        }
    }

    let last = node_count - 1;
    let nodes: Vec<f64> = (0..node_count)
        .map(|i| {
            if i == last {
                // Pin the endpoint: i/last rounding must not move the support boundary.
                spec.radius
            } else {
                spec.radius * i as f64 / last as f64
            }
        })
        .collect();
    let values: Vec<f64> = nodes
        .iter()
        .map(|&r| match &spec.family {
            ProfileFamily::Uniform { amplitude } => *amplitude,
            ProfileFamily::Parabolic { amplitude } => {
                let x = r / spec.radius;
                amplitude * (1.0 - x * x)
            }
            ProfileFamily::Gaussian { amplitude, width } => {
                amplitude * (-(r / width) * (r / width)).exp()
            }
            ProfileFamily::PiecewiseLinear { points } => {
                let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
                let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
                crate::numerics::interp_clamped(&xs, &ys, r)
            }
        })
        .collect();
    RadialProfile::new(nodes, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn coupling_matches_conventional_constants() {
        assert_eq!(default_coupling(1).unwrap(), 1.0);
        assert_relative_eq!(default_coupling(2).unwrap(), std::f64::consts::TAU);
        assert_relative_eq!(default_coupling(3).unwrap(), 4.0 * std::f64::consts::PI);
    }

    #[test]
    fn coupling_in_four_dimensions_is_sphere_area() {
        // 2*pi^2 = 19.739...
        let got = default_coupling(4).unwrap();
        assert_relative_eq!(got, 2.0 * std::f64::consts::PI.powi(2), epsilon = 1e-12);
        assert_relative_eq!(got, 19.739_208_802_178_716, epsilon = 1e-12);
    }

    #[test]
    fn sphere_area_recurrence_agrees_with_known_values() {
        assert_relative_eq!(unit_sphere_area(1).unwrap(), 2.0);
        assert_relative_eq!(unit_sphere_area(2).unwrap(), std::f64::consts::TAU);
        assert_relative_eq!(unit_sphere_area(3).unwrap(), 4.0 * std::f64::consts::PI);
        // w(5) = 8*pi^2/3
        assert_relative_eq!(
            unit_sphere_area(5).unwrap(),
            8.0 * std::f64::consts::PI.powi(2) / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn invalid_dimensions_are_rejected() {
        assert!(matches!(
            default_coupling(0),
            Err(Error::InvalidDimension { .. })
        ));
        assert!(matches!(
            unit_sphere_area(MAX_DIM + 1),
            Err(Error::InvalidDimension { .. })
        ));
    }

    #[test]
    fn pressure_examples() {
        assert_relative_eq!(pressure(2.0, 1.0, 2.0).unwrap(), 4.0);
        // isothermal case is linear in density
        assert_relative_eq!(pressure(3.0, 0.5, 1.0).unwrap(), 1.5);
        assert_relative_eq!(pressure(0.0, 1.0, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn pressure_rejects_bad_inputs() {
        assert!(pressure(-1.0, 1.0, 2.0).is_err());
        assert!(pressure(1.0, 1.0, 0.5).is_err());
        assert!(pressure(f64::NAN, 1.0, 2.0).is_err());
    }

    #[test]
    fn params_validate_their_ranges() {
        assert!(ModelParams::new(3, ForceSign::Attractive, 0.0, 2.0).is_ok());
        // isothermal exponent is allowed
        assert!(ModelParams::new(3, ForceSign::Attractive, 1.0, 1.0).is_ok());
        assert!(ModelParams::new(0, ForceSign::Free, 0.0, 2.0).is_err());
        assert!(ModelParams::new(3, ForceSign::Free, -1.0, 2.0).is_err());
        assert!(ModelParams::new(3, ForceSign::Free, 1.0, 0.9).is_err());
        assert!(ModelParams::new(3, ForceSign::Free, 0.0, 2.0)
            .unwrap()
            .with_coupling(-1.0)
            .is_err());
    }

    #[test]
    fn parabolic_profile_hits_expected_nodes() {
        let spec = ProfileSpec {
            family: ProfileFamily::Parabolic { amplitude: 1.0 },
            radius: 1.0,
        };
        let p = build_profile(&spec, 3).unwrap();
        assert_eq!(p.nodes(), &[0.0, 0.5, 1.0]);
        assert_eq!(p.values(), &[1.0, 0.75, 0.0]);
    }

    #[test]
    fn piecewise_profile_interpolates_anchors() {
        let spec = ProfileSpec {
            family: ProfileFamily::PiecewiseLinear {
                points: vec![(0.0, 0.0), (1.0, -1.0)],
            },
            radius: 1.0,
        };
        let p = build_profile(&spec, 5).unwrap();
        for (&r, &v) in p.nodes().iter().zip(p.values()) {
            assert_relative_eq!(v, -r, epsilon = 1e-15);
        }
    }

    #[test]
    fn profile_constructor_rejects_malformed_input() {
        assert!(RadialProfile::new(vec![0.0], vec![1.0]).is_err());
        assert!(RadialProfile::new(vec![0.1, 1.0], vec![1.0, 1.0]).is_err());
        assert!(RadialProfile::new(vec![0.0, 0.5, 0.5], vec![1.0, 1.0, 1.0]).is_err());
        assert!(RadialProfile::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(RadialProfile::new(vec![0.0, 1.0], vec![f64::NAN, 1.0]).is_err());
        let spec = ProfileSpec {
            family: ProfileFamily::Uniform { amplitude: 1.0 },
            radius: 1.0,
        };
        assert!(build_profile(&spec, 2).is_err());
        let bad = ProfileSpec {
            family: ProfileFamily::Uniform { amplitude: 1.0 },
            radius: -1.0,
        };
        assert!(build_profile(&bad, 10).is_err());
    }

    #[test]
    fn value_at_clamps_outside_support() {
        let p = RadialProfile::new(vec![0.0, 1.0, 2.0], vec![3.0, 2.0, 1.0]).unwrap();
        assert_relative_eq!(p.value_at(0.5), 2.5);
        assert_relative_eq!(p.value_at(-1.0), 3.0);
        assert_relative_eq!(p.value_at(5.0), 1.0);
    }

    proptest! {
        #[test]
        fn pressure_is_monotone_in_density(
            k in 0.01f64..10.0,
            gamma in 1.0f64..3.0,
            rho in 0.0f64..50.0,
            bump in 0.001f64..5.0,
        ) {
            let lo = pressure(rho, k, gamma).unwrap();
            let hi = pressure(rho + bump, k, gamma).unwrap();
            prop_assert!(hi > lo, "pressure must grow with density: {hi} <= {lo}");
        }

        #[test]
        fn built_profiles_have_ordered_nodes(
            amplitude in 0.1f64..10.0,
            radius in 0.1f64..10.0,
            nodes in 3usize..200,
        ) {
            let spec = ProfileSpec {
                family: ProfileFamily::Parabolic { amplitude },
                radius,
            };
            let p = build_profile(&spec, nodes).unwrap();
            prop_assert_eq!(p.len(), nodes);
            prop_assert_eq!(p.nodes()[0], 0.0);
            prop_assert!(p.nodes().windows(2).all(|w| w[1] > w[0]));
            prop_assert!(p.is_nonnegative());
            prop_assert_eq!(p.support_radius(), radius);
        }
    }
}
