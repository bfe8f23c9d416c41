//! Internal quadrature, finite-difference, and time-stepping helpers.
//!
//! Everything here is deliberately fixed-order and deterministic: composite
//! trapezoid rules, 3/4-point Lagrange stencils, classical RK4, and a
//! bracketed event locator that refines a detection time by marching
//! progressively finer substeps from the last known-good state.

/// Linear interpolation on sorted nodes, clamping outside the range.
pub(crate) fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    debug_assert!(!xs.is_empty());
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    // partition_point returns the first index with node > x; x is strictly
    // inside the range here, so 1 <= i <= len-1.
    let i = xs.partition_point(|&n| n <= x);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = (x - x0) / (x1 - x0);
    ys[i - 1] * (1.0 - w) + ys[i] * w
}

/// Composite trapezoid rule on arbitrary sorted nodes.
pub(crate) fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let mut sum = 0.0;
    for i in 1..xs.len() {
        sum += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
    }
    sum
}

/// Running trapezoid integral: `out[i]` integrates from `xs[0]` to `xs[i]`.
pub(crate) fn cumulative_trapezoid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    out.push(0.0);
    for i in 1..xs.len() {
        sum += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        out.push(sum);
    }
    out
}

/// Trapezoid rule with a cubic-Hermite end correction per cell, using
/// finite-difference slopes. Exact for cubics on any grid; fourth-order on
/// uniform grids. Used where plain second-order quadrature would dominate a
/// tight tolerance.
pub(crate) fn corrected_trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() < 3 {
        return trapezoid(xs, ys);
    }
    let slopes = derivative_on_nodes(xs, ys);
    let mut sum = 0.0;
    for i in 1..xs.len() {
        let h = xs[i] - xs[i - 1];
        sum += 0.5 * h * (ys[i] + ys[i - 1]) - h * h / 12.0 * (slopes[i] - slopes[i - 1]);
    }
    sum
}

/// Derivative of the quadratic through three points, evaluated at `x`.
pub(crate) fn lagrange3_derivative(
    xa: f64,
    xb: f64,
    xc: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    x: f64,
) -> f64 {
    fa * (2.0 * x - xb - xc) / ((xa - xb) * (xa - xc))
        + fb * (2.0 * x - xa - xc) / ((xb - xa) * (xb - xc))
        + fc * (2.0 * x - xa - xb) / ((xc - xa) * (xc - xb))
}

/// Second derivative of the quadratic through three points (x-independent).
fn lagrange3_second(xa: f64, xb: f64, xc: f64, fa: f64, fb: f64, fc: f64) -> f64 {
    2.0 * (fa / ((xa - xb) * (xa - xc))
        + fb / ((xb - xa) * (xb - xc))
        + fc / ((xc - xa) * (xc - xb)))
}

/// Second derivative of the cubic through four points, evaluated at `x`.
fn lagrange4_second(xs: [f64; 4], fs: [f64; 4], x: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..4 {
        let mut others = [0.0; 3];
        let mut k = 0;
        for (m, &xm) in xs.iter().enumerate() {
            if m != j {
                others[k] = xm;
                k += 1;
            }
        }
        let denom = (xs[j] - others[0]) * (xs[j] - others[1]) * (xs[j] - others[2]);
        let num = 2.0 * (3.0 * x - others[0] - others[1] - others[2]);
        total += fs[j] * num / denom;
    }
    total
}

/// First derivative at every node: centered 3-point stencils inside,
/// one-sided 3-point stencils at the ends. Second-order on smooth data,
/// exact for quadratics, also on nonuniform grids.
pub(crate) fn derivative_on_nodes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let m = xs.len();
    assert!(m >= 3, "derivative stencils need at least 3 nodes");
    let mut out = Vec::with_capacity(m);
    out.push(lagrange3_derivative(
        xs[0], xs[1], xs[2], ys[0], ys[1], ys[2], xs[0],
    ));
    for i in 1..m - 1 {
        out.push(lagrange3_derivative(
            xs[i - 1],
            xs[i],
            xs[i + 1],
            ys[i - 1],
            ys[i],
            ys[i + 1],
            xs[i],
        ));
    }
    out.push(lagrange3_derivative(
        xs[m - 3],
        xs[m - 2],
        xs[m - 1],
        ys[m - 3],
        ys[m - 2],
        ys[m - 1],
        xs[m - 1],
    ));
    out
}

/// Second derivative at every node: centered 3-point stencils inside,
/// one-sided 4-point stencils at the ends so the boundary values stay
/// second-order.
pub(crate) fn second_derivative_on_nodes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let m = xs.len();
    assert!(m >= 3, "second-derivative stencils need at least 3 nodes");
    let mut out = Vec::with_capacity(m);
    if m == 3 {
        let v = lagrange3_second(xs[0], xs[1], xs[2], ys[0], ys[1], ys[2]);
        return vec![v; 3];
    }
    out.push(lagrange4_second(
        [xs[0], xs[1], xs[2], xs[3]],
        [ys[0], ys[1], ys[2], ys[3]],
        xs[0],
    ));
    for i in 1..m - 1 {
        out.push(lagrange3_second(
            xs[i - 1],
            xs[i],
            xs[i + 1],
            ys[i - 1],
            ys[i],
            ys[i + 1],
        ));
    }
    out.push(lagrange4_second(
        [xs[m - 4], xs[m - 3], xs[m - 2], xs[m - 1]],
        [ys[m - 4], ys[m - 3], ys[m - 2], ys[m - 1]],
        xs[m - 1],
    ));
    out
}

/// One classical RK4 step for a scalar ODE `y' = f(t, y)`.
pub(crate) fn rk4_scalar(t: f64, y: f64, h: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    let k4 = f(t + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// One classical RK4 step for a two-component system.
pub(crate) fn rk4_pair(
    t: f64,
    y: (f64, f64),
    h: f64,
    f: impl Fn(f64, (f64, f64)) -> (f64, f64),
) -> (f64, f64) {
    let add = |a: (f64, f64), b: (f64, f64), s: f64| (a.0 + s * b.0, a.1 + s * b.1);
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = f(t + h, add(y, k3, h));
    (
        y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// One classical RK4 step for a vector system, `deriv(t, y, out)`.
pub(crate) fn rk4_vec(
    t: f64,
    y: &[f64],
    h: f64,
    deriv: &mut impl FnMut(f64, &[f64], &mut [f64]),
) -> Vec<f64> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    deriv(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    deriv(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    deriv(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    deriv(t + h, &tmp, &mut k4);

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    out
}

/// Substeps per refinement level in [`locate_event`]. Enough that each level
/// re-integrates its bracket well inside the integrator's accurate regime.
const EVENT_SUBSTEPS: usize = 16;

/// Refine the earliest time in `(t0, t0 + dt]` where `hit` becomes true.
///
/// `state0` at `t0` must not already satisfy `hit` (if it does, `t0` is
/// returned directly). Each level re-integrates the current bracket from its
/// known-good left state with [`EVENT_SUBSTEPS`] steps of the integrator
/// `advance`, narrows to the first substep whose endpoint hits, and recurses
/// until the bracket is shorter than `time_tol`. Returns the hit time and the
/// state there, or `None` when the refined trajectory never reproduces the
/// coarse hit inside the window (a step-size artifact; callers should resume
/// coarse stepping).
pub(crate) fn locate_event<S: Clone>(
    state0: &S,
    t0: f64,
    dt: f64,
    advance: &impl Fn(f64, &S, f64) -> S,
    hit: &impl Fn(f64, &S) -> bool,
    time_tol: f64,
) -> Option<(f64, S)> {
    if hit(t0, state0) {
        return Some((t0, state0.clone()));
    }
    let mut left_t = t0;
    let mut left_state = state0.clone();
    let mut width = dt;
    loop {
        let h = width / EVENT_SUBSTEPS as f64;
        let mut s = left_state.clone();
        let mut found = None;
        for k in 0..EVENT_SUBSTEPS {
            let t_start = left_t + k as f64 * h;
            let s_next = advance(t_start, &s, h);
            if hit(t_start + h, &s_next) {
                found = Some((t_start, s, s_next));
                break;
            }
            s = s_next;
        }
        let (t_start, s_before, s_at) = found?;
        if h <= time_tol {
            return Some((t_start + h, s_at));
        }
        left_t = t_start;
        left_state = s_before;
        width = h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interp_hits_nodes_and_midpoints() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [2.0, 4.0, 0.0];
        assert_relative_eq!(interp_clamped(&xs, &ys, 0.0), 2.0);
        assert_relative_eq!(interp_clamped(&xs, &ys, 0.5), 3.0);
        assert_relative_eq!(interp_clamped(&xs, &ys, 2.0), 2.0);
        assert_relative_eq!(interp_clamped(&xs, &ys, 9.0), 0.0);
    }

    #[test]
    fn trapezoid_is_exact_on_linear_data() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert_relative_eq!(trapezoid(&xs, &ys), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn corrected_trapezoid_is_exact_on_cubics() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x - 2.0 * x * x + 0.5).collect();
        // integral over [0,1] of x^3 - 2x^2 + 1/2 = 1/4 - 2/3 + 1/2 = 1/12
        assert_relative_eq!(corrected_trapezoid(&xs, &ys), 1.0 / 12.0, epsilon = 1e-14);
    }

    #[test]
    fn cumulative_matches_total() {
        let xs: Vec<f64> = (0..21).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let cum = cumulative_trapezoid(&xs, &ys);
        assert_relative_eq!(*cum.last().unwrap(), trapezoid(&xs, &ys));
        assert!(cum.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn derivative_stencils_are_exact_on_quadratics_nonuniform_grid() {
        let xs = [0.0, 0.2, 0.5, 0.9, 1.4, 2.0];
        let f = |x: f64| 2.0 * x * x - 3.0 * x + 1.0;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let d = derivative_on_nodes(&xs, &ys);
        for (&x, &got) in xs.iter().zip(&d) {
            assert_relative_eq!(got, 4.0 * x - 3.0, epsilon = 1e-12);
        }
        let dd = second_derivative_on_nodes(&xs, &ys);
        for &got in &dd {
            assert_relative_eq!(got, 4.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn boundary_second_derivative_is_exact_on_cubics() {
        let xs: Vec<f64> = (0..7).map(|i| i as f64 * 0.3).collect();
        let f = |x: f64| x * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let dd = second_derivative_on_nodes(&xs, &ys);
        assert_relative_eq!(dd[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(
            *dd.last().unwrap(),
            6.0 * xs.last().unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn rk4_reproduces_exponential_to_fifth_order_per_step() {
        let mut y = 1.0f64;
        let h = 0.01;
        for k in 0..100 {
            y = rk4_scalar(k as f64 * h, y, h, |_, y| y);
        }
        // global error ~ h^4 * e / 120 ~ 2.3e-10 at h = 0.01
        assert_relative_eq!(y, 1.0f64.exp(), epsilon = 1e-9);
    }

    #[test]
    fn rk4_pair_integrates_harmonic_oscillator() {
        let mut s = (1.0f64, 0.0f64);
        let h = 1e-3;
        let steps = (std::f64::consts::TAU / h) as usize;
        for k in 0..steps {
            s = rk4_pair(k as f64 * h, s, h, |_, (x, v)| (v, -x));
        }
        let t = steps as f64 * h;
        assert_relative_eq!(s.0, t.cos(), epsilon = 1e-9);
        assert_relative_eq!(s.1, -t.sin(), epsilon = 1e-9);
    }

    #[test]
    fn rk4_vec_matches_pair_on_same_system() {
        let pair = rk4_pair(0.0, (1.0, 0.0), 0.1, |_, (x, v)| (v, -x));
        let mut deriv = |_t: f64, y: &[f64], out: &mut [f64]| {
            out[0] = y[1];
            out[1] = -y[0];
        };
        let vec = rk4_vec(0.0, &[1.0, 0.0], 0.1, &mut deriv);
        assert_relative_eq!(vec[0], pair.0);
        assert_relative_eq!(vec[1], pair.1);
    }

    #[test]
    fn locate_event_finds_a_threshold_crossing() {
        // y' = 1, y(0) = 0, event at y >= 0.37 => t = 0.37 exactly.
        let advance = |_t: f64, y: &f64, h: f64| y + h;
        let hit = |_t: f64, y: &f64| *y >= 0.37;
        let (t, y) = locate_event(&0.0, 0.0, 1.0, &advance, &hit, 1e-13).unwrap();
        assert_relative_eq!(t, 0.37, epsilon = 1e-12);
        assert!(y >= 0.37);
    }

    #[test]
    fn locate_event_reports_artifacts_as_none() {
        // The predicate can never be satisfied by the refined trajectory.
        let advance = |_t: f64, y: &f64, h: f64| y + h;
        let hit = |_t: f64, y: &f64| *y > 10.0;
        assert!(locate_event(&0.0, 0.0, 1.0, &advance, &hit, 1e-12).is_none());
    }

    #[test]
    fn locate_event_returns_left_edge_if_already_hit() {
        let advance = |_t: f64, y: &f64, h: f64| y + h;
        let hit = |_t: f64, _y: &f64| true;
        let (t, _) = locate_event(&5.0, 2.0, 1.0, &advance, &hit, 1e-12).unwrap();
        assert_eq!(t, 2.0);
    }
}
