//! Radial field kernels, enclosed-density integrals, and the 1-D potential.
//!
//! The field generated by a radial density enters the momentum balance only
//! through the enclosed integral `int_0^r rho(s) s^(dim-1) ds`; the kernel
//! itself (`|x|`, `log r`, `-r^(2-dim)`) is exposed for table evaluation and
//! for the explicit 1-D potential convolution used as a cross-check.

use crate::error::{Error, Result};
use crate::model::{ModelParams, RadialProfile};
use crate::numerics;

/// Fundamental radial kernel per dimension: `r` in 1-D, `ln r` in 2-D,
/// `-1/r^(dim-2)` in 3-D and above.
pub fn greens_function(radius: f64, dim: usize) -> Result<f64> {
    if dim == 0 || dim > crate::model::MAX_DIM {
        return Err(Error::InvalidDimension {
            dim,
            max: crate::model::MAX_DIM,
        });
    }
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::domain(
            "kernel",
            format!("radius must be finite and nonnegative, got {radius}"),
        ));
    }
    if radius == 0.0 && dim >= 2 {
        return Err(Error::Singularity { dim });
    }
    Ok(match dim {
        1 => radius,
        2 => radius.ln(),
        n => -radius.powi(-((n as i32) - 2)),
    })
}

/// Potential values sampled at query points.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

/// 1-D potential of a symmetric density: `phi(x) = int |x - y| rho(|y|) dy`
/// over the mirrored support `[-R, R]`, by the composite trapezoid rule on
/// the mirrored profile nodes.
pub fn potential_1d(density: &RadialProfile, points: &[f64]) -> Result<PotentialSample> {
    if !density.is_nonnegative() {
        return Err(Error::domain(
            "potential",
            "density profile must be nonnegative",
        ));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("potential", "query points must be finite"));
    }

    let nodes = density.nodes();
    let vals = density.values();
    let m = nodes.len();
    // Mirrored grid: [-r_m ... -r_1, 0, r_1 ... r_m].
    let mut ys = Vec::with_capacity(2 * m - 1);
    let mut rho = Vec::with_capacity(2 * m - 1);
    for i in (1..m).rev() {
        ys.push(-nodes[i]);
        rho.push(vals[i]);
    }
    ys.extend_from_slice(nodes);
    rho.extend_from_slice(vals);

    let values = points
        .iter()
        .map(|&x| {
            let integrand: Vec<f64> = ys
                .iter()
                .zip(&rho)
                .map(|(&y, &d)| (x - y).abs() * d)
                .collect();
            numerics::trapezoid(&ys, &integrand)
        })
        .collect();
    Ok(PotentialSample {
        points: points.to_vec(),
        values,
    })
}

/// `int_0^min(r, R) rho(s) s^(dim-1) ds` by the trapezoid rule on the profile
/// nodes, with the partial last cell evaluated at the interpolated density.
pub fn enclosed_integral(r: f64, density: &RadialProfile, dim: usize) -> Result<f64> {
    if dim == 0 || dim > crate::model::MAX_DIM {
        return Err(Error::InvalidDimension {
            dim,
            max: crate::model::MAX_DIM,
        });
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::domain(
            "enclosed integral",
            format!("radius must be finite and nonnegative, got {r}"),
        ));
    }
    let nodes = density.nodes();
    let vals = density.values();
    let weight = |s: f64| {
        if dim == 1 {
            1.0
        } else {
            s.powi(dim as i32 - 1)
        }
    };

    let r_eff = r.min(density.support_radius());
    let mut sum = 0.0;
    for i in 1..nodes.len() {
        if nodes[i] <= r_eff {
            sum += 0.5
                * (nodes[i] - nodes[i - 1])
                * (vals[i] * weight(nodes[i]) + vals[i - 1] * weight(nodes[i - 1]));
        } else {
            // partial last cell: integrate up to r_eff with the density
            // linearly interpolated there
            if r_eff > nodes[i - 1] {
                let rho_r = density.value_at(r_eff);
                sum += 0.5
                    * (r_eff - nodes[i - 1])
                    * (rho_r * weight(r_eff) + vals[i - 1] * weight(nodes[i - 1]));
            }
            break;
        }
    }
    Ok(sum)
}

/// Below this radius the acceleration is returned as its central limit, 0,
/// instead of dividing by a vanishing (or underflowing) power of r.
const CENTER_GUARD: f64 = 1e-30;

/// Radial acceleration `sign * coupling * enclosed(r) / r^(dim-1)`.
///
/// For bounded density the enclosed integral scales like `r^dim`, so the
/// ratio tends to 0 at the center; `r = 0` (and radii small enough that the
/// power underflows) return that limit directly.
pub fn radial_acceleration(r: f64, density: &RadialProfile, params: &ModelParams) -> Result<f64> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::domain(
            "radial acceleration",
            format!("radius must be finite and nonnegative, got {r}"),
        ));
    }
    let sign = params.force.signum();
    if sign == 0.0 {
        return Ok(0.0);
    }
    if r <= CENTER_GUARD {
        return Ok(0.0);
    }
    let power = if params.dim == 1 {
        1.0
    } else {
        r.powi(params.dim as i32 - 1)
    };
    if power == 0.0 {
        return Ok(0.0);
    }
    let enclosed = enclosed_integral(r, density, params.dim)?;
    Ok(sign * params.coupling * enclosed / power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_profile, ForceSign, ProfileFamily, ProfileSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn uniform_profile(amplitude: f64, radius: f64, nodes: usize) -> RadialProfile {
        build_profile(
            &ProfileSpec {
                family: ProfileFamily::Uniform { amplitude },
                radius,
            },
            nodes,
        )
        .unwrap()
    }

    #[test]
    fn kernel_values_per_dimension() {
        assert_relative_eq!(greens_function(0.5, 1).unwrap(), 0.5);
        assert_relative_eq!(greens_function(0.0, 1).unwrap(), 0.0);
        assert_relative_eq!(greens_function(1.0, 2).unwrap(), 0.0);
        assert_relative_eq!(greens_function(2.0, 3).unwrap(), -0.5);
        // 5-D kernel falls off as -1/r^3
        assert_relative_eq!(greens_function(2.0, 5).unwrap(), -0.125);
    }

    #[test]
    fn kernel_rejects_singular_and_invalid_input() {
        assert!(matches!(
            greens_function(0.0, 2),
            Err(Error::Singularity { dim: 2 })
        ));
        assert!(matches!(
            greens_function(0.0, 3),
            Err(Error::Singularity { dim: 3 })
        ));
        assert!(matches!(
            greens_function(1.0, 0),
            Err(Error::InvalidDimension { .. })
        ));
        assert!(greens_function(-1.0, 1).is_err());
    }

    #[test]
    fn unit_density_potential_is_one_plus_x_squared() {
        // rho = 1 on [-1, 1]: phi(x) = x^2 + 1 inside the support. With 101
        // nodes the query points land on nodes and the kink cell vanishes, so
        // the trapezoid value is exact.
        let p = uniform_profile(1.0, 1.0, 101);
        let sample = potential_1d(&p, &[0.0, 0.25, 0.5, 1.0]).unwrap();
        for (&x, &phi) in sample.points.iter().zip(&sample.values) {
            assert_relative_eq!(phi, x * x + 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn potential_converges_at_second_order_against_the_parabola() {
        // Query point chosen off every node so the kink-cell error is the
        // dominant term; halving the spacing must cut the error by >= 3.5.
        let x = 1.0 / std::f64::consts::PI;
        let exact = x * x + 1.0;
        let coarse = potential_1d(&uniform_profile(1.0, 1.0, 65), &[x])
            .unwrap()
            .values[0];
        let fine = potential_1d(&uniform_profile(1.0, 1.0, 129), &[x])
            .unwrap()
            .values[0];
        let e_coarse = (coarse - exact).abs();
        let e_fine = (fine - exact).abs();
        assert!(
            e_coarse / e_fine >= 3.5,
            "convergence factor too small: {e_coarse} / {e_fine} = {}",
            e_coarse / e_fine
        );
    }

    #[test]
    fn potential_rejects_negative_density() {
        let p = RadialProfile::new(vec![0.0, 1.0], vec![1.0, -0.5]).unwrap();
        assert!(potential_1d(&p, &[0.0]).is_err());
    }

    #[test]
    fn enclosed_integral_matches_power_law() {
        let p = uniform_profile(1.0, 1.0, 2001);
        // int_0^0.5 s^2 ds = 0.5^3 / 3
        let got = enclosed_integral(0.5, &p, 3).unwrap();
        assert_relative_eq!(got, 0.125 / 3.0, epsilon = 1e-7);
        // beyond the support the integral saturates at 1/3
        let full = enclosed_integral(2.0, &p, 3).unwrap();
        assert_relative_eq!(full, 1.0 / 3.0, epsilon = 1e-7);
        assert_relative_eq!(enclosed_integral(0.0, &p, 3).unwrap(), 0.0);
    }

    #[test]
    fn enclosed_integral_handles_partial_cells_exactly_in_one_dimension() {
        // 1-D integrand is the density itself; the partial cell is exact for
        // piecewise-linear rho.
        let p = RadialProfile::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        // int_0^1.5 rho = 0.5 + (1 + 2) / 2 * 0.5 = 1.25
        assert_relative_eq!(
            enclosed_integral(1.5, &p, 1).unwrap(),
            1.25,
            epsilon = 1e-14
        );
    }

    #[test]
    fn acceleration_examples_for_attractive_unit_ball() {
        let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
        let p = uniform_profile(1.0, 1.0, 4001);
        let inner = radial_acceleration(0.5, &p, &params).unwrap();
        assert_relative_eq!(
            inner,
            -4.0 * std::f64::consts::PI * 0.5 / 3.0,
            epsilon = 1e-6
        );
        let outer = radial_acceleration(2.0, &p, &params).unwrap();
        assert_relative_eq!(outer, -std::f64::consts::PI / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn acceleration_limits_and_neutral_force() {
        let p = uniform_profile(1.0, 1.0, 11);
        let attract = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
        assert_eq!(radial_acceleration(0.0, &p, &attract).unwrap(), 0.0);
        let free = ModelParams::pressureless(3, ForceSign::Free).unwrap();
        assert_eq!(radial_acceleration(0.7, &p, &free).unwrap(), 0.0);
        let repulse = ModelParams::pressureless(3, ForceSign::Repulsive).unwrap();
        assert!(radial_acceleration(0.7, &p, &repulse).unwrap() > 0.0);
    }

    proptest! {
        #[test]
        fn enclosed_integral_is_monotone_in_radius(
            r1 in 0.0f64..2.0,
            r2 in 0.0f64..2.0,
            dim in 1usize..6,
        ) {
            let p = uniform_profile(1.0, 1.0, 101);
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let a = enclosed_integral(lo, &p, dim).unwrap();
            let b = enclosed_integral(hi, &p, dim).unwrap();
            prop_assert!(b >= a - 1e-15, "enclosed integral decreased: {a} -> {b}");
        }
    }
}
