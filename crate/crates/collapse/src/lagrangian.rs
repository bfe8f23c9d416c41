//! Radial Lagrangian shell solver with blowup detection.
//!
//! The fluid is discretized as mass shells moving along characteristics:
//! each shell carries a fixed mass and follows dr/dt = u,
//! du/dt = sign * coupling * S(r) / r^(dim-1) plus an optional gamma-law
//! pressure term, where S is the shell-discretized enclosed density
//! integral. Blowup shows up as shell crossing, divergence escape, or
//! support collapse; all three are detected online and refined by bisection
//! over the last step. An independent boundary ODE integrator for
//! R'' = sign * M / R^(dim-1) provides the collapse-time oracle.

use crate::error::{Error, Result};
use crate::functionals;
use crate::model::{unit_sphere_area, ForceSign, ModelParams, RadialProfile, MAX_DIM};
use crate::numerics;
use crate::riccati::RiccatiBound;

/// Fewest shells accepted by [`init_shells`]; below this the finite
/// difference stencils and annulus volumes are too coarse to mean anything.
pub const MIN_SHELLS: usize = 8;

/// A boundary trajectory counts as collapsed when R drops below this
/// fraction of its initial value.
pub const COLLAPSE_RADIUS_FRACTION: f64 = 1e-6;

/// Snapshot of the shell discretization at one instant.
///
/// Radii must stay strictly increasing for the state to be valid; masses
/// never change after construction. Densities are derived, not stored:
/// shell j owns the annulus between the mid-radii to its neighbors (the
/// innermost annulus starts at 0, the outermost ends at the last radius).
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub time: f64,
    pub dim: usize,
    pub shell_mass: Vec<f64>,
    pub shell_radius: Vec<f64>,
    pub shell_velocity: Vec<f64>,
}

impl FluidState {
    pub fn shell_count(&self) -> usize {
        self.shell_radius.len()
    }

    /// True when every value is finite and the radii are strictly
    /// increasing starting above 0.
    pub fn shells_ordered(&self) -> bool {
        self.all_finite()
            && self.shell_radius.first().is_some_and(|&r| r > 0.0)
            && self.shell_radius.windows(2).all(|w| w[0] < w[1])
    }

    fn all_finite(&self) -> bool {
        self.time.is_finite()
            && self.shell_radius.iter().all(|v| v.is_finite())
            && self.shell_velocity.iter().all(|v| v.is_finite())
            && self.shell_mass.iter().all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidDimension {
                dim: self.dim,
                max: MAX_DIM,
            });
        }
        let n = self.shell_radius.len();
        if n < 3 || self.shell_mass.len() != n || self.shell_velocity.len() != n {
            return Err(Error::domain(
                "fluid state",
                "need at least 3 shells with matching mass/radius/velocity lengths",
            ));
        }
        if self.shell_mass.iter().any(|&m| m <= 0.0 || !m.is_finite()) {
            return Err(Error::domain(
                "fluid state",
                "shell masses must be positive",
            ));
        }
        if !self.shells_ordered() {
            return Err(Error::domain(
                "fluid state",
                "shell radii must be finite, positive, and strictly increasing",
            ));
        }
        Ok(())
    }

    pub fn outer_radius(&self) -> f64 {
        *self.shell_radius.last().unwrap()
    }

    pub fn total_mass(&self) -> f64 {
        self.shell_mass.iter().sum()
    }

    /// Volume of the ball out to the outermost shell.
    pub fn support_volume(&self) -> Result<f64> {
        let area = unit_sphere_area(self.dim)?;
        Ok(area / self.dim as f64 * self.outer_radius().powi(self.dim as i32))
    }

    /// Annulus volumes owned by each shell. The boundaries are 0, the
    /// mid-radii between neighbors, and the outermost radius, so the
    /// volumes partition the support ball exactly (their sum telescopes to
    /// [`Self::support_volume`]).
    pub fn annulus_volumes(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let area = unit_sphere_area(self.dim)?;
        Ok(annulus_volumes_raw(&self.shell_radius, self.dim, area))
    }

    /// Derived densities: shell mass over annulus volume.
    pub fn densities(&self) -> Result<Vec<f64>> {
        let volumes = self.annulus_volumes()?;
        Ok(self
            .shell_mass
            .iter()
            .zip(&volumes)
            .map(|(m, v)| m / v)
            .collect())
    }

    /// Density at the center, estimated from the innermost shell.
    ///
    /// A ball of radius 2^(1/dim) * r_0 encloses exactly m_0 when the
    /// density near the center is uniform, so this estimator is exact for
    /// locally uniform centers (any smooth radial density). The innermost
    /// annulus density is not: its midpoint boundary sits at a fixed
    /// fraction of the half-mass radius, which biases it by a constant
    /// factor independent of shell count.
    pub fn center_density(&self) -> Result<f64> {
        self.validate()?;
        let area = unit_sphere_area(self.dim)?;
        let r0 = self.shell_radius[0];
        Ok(self.shell_mass[0] * self.dim as f64 / (2.0 * area * r0.powi(self.dim as i32)))
    }
}

fn annulus_volumes_raw(radii: &[f64], dim: usize, area: f64) -> Vec<f64> {
    let n = radii.len();
    let p = dim as i32;
    let scale = area / dim as f64;
    let mut bounds = Vec::with_capacity(n + 1);
    bounds.push(0.0);
    for w in radii.windows(2) {
        bounds.push(0.5 * (w[0] + w[1]));
    }
    bounds.push(radii[n - 1]);
    let powers: Vec<f64> = bounds.iter().map(|b| b.powi(p)).collect();
    powers.windows(2).map(|w| scale * (w[1] - w[0])).collect()
}

/// Place shells at equal-enclosed-mass radii of the density profile and
/// sample their velocities from the velocity profile.
///
/// Each shell carries exactly total mass / shell_count, so the mass sum is
/// exact by construction. The density must be strictly positive everywhere
/// inside its support (the outermost node may vanish); an interior zero
/// would make the mass quantiles degenerate.
pub fn init_shells(
    density: &RadialProfile,
    velocity: &RadialProfile,
    shell_count: usize,
    dim: usize,
) -> Result<FluidState> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidDimension { dim, max: MAX_DIM });
    }
    if shell_count < MIN_SHELLS {
        return Err(Error::domain(
            "shell initialization",
            format!("need at least {MIN_SHELLS} shells, got {shell_count}"),
        ));
    }
    let nodes = density.nodes();
    let vals = density.values();
    for (i, &v) in vals.iter().enumerate() {
        if v <= 0.0 && i + 1 < vals.len() {
            return Err(Error::VacuumRegion { radius: nodes[i] });
        }
    }
    let total = functionals::total_mass(density, dim)?;
    let area = unit_sphere_area(dim)?;
    let p = dim as i32 - 1;

    // cumulative mass at the profile nodes, then per-shell bisection for
    // the (j + 1/2)/n quantile inside its bracketing cell
    let integrand: Vec<f64> = nodes
        .iter()
        .zip(vals)
        .map(|(&r, &rho)| area * rho * r.powi(p))
        .collect();
    let cum = numerics::cumulative_trapezoid(nodes, &integrand);
    let cum_total = *cum.last().unwrap();

    let n = shell_count;
    let mut radii = Vec::with_capacity(n);
    for j in 0..n {
        let target = (j as f64 + 0.5) / n as f64 * cum_total;
        let cell = cum
            .partition_point(|&c| c <= target)
            .clamp(1, nodes.len() - 1)
            - 1;
        let partial = |r: f64| -> f64 {
            let w = (r - nodes[cell]) / (nodes[cell + 1] - nodes[cell]);
            let rho = vals[cell] * (1.0 - w) + vals[cell + 1] * w;
            0.5 * (r - nodes[cell]) * (integrand[cell] + area * rho * r.powi(p))
        };
        let (mut lo, mut hi) = (nodes[cell], nodes[cell + 1]);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cum[cell] + partial(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        radii.push(0.5 * (lo + hi));
    }

    let velocities: Vec<f64> = radii.iter().map(|&r| velocity.value_at(r)).collect();
    let state = FluidState {
        time: 0.0,
        dim,
        shell_mass: vec![total / n as f64; n],
        shell_radius: radii,
        shell_velocity: velocities,
    };
    state.validate()?;
    Ok(state)
}

/// Acceleration on each shell under the current parameters:
/// `sign * coupling * S_j / r_j^(dim-1)` with
/// `S_j = (enclosed mass below + m_j/2) / sphere_area`, minus the gamma-law
/// pressure term `K * gamma * rho^(gamma-2) * d(rho)/dr` when K > 0.
pub fn shell_accelerations(state: &FluidState, params: &ModelParams) -> Result<Vec<f64>> {
    state.validate()?;
    if params.dim != state.dim {
        return Err(Error::domain(
            "shell accelerations",
            format!(
                "state dimension {} does not match parameter dimension {}",
                state.dim, params.dim
            ),
        ));
    }
    let area = unit_sphere_area(state.dim)?;
    let half_enclosed = half_enclosed_integrals(&state.shell_mass, area);
    let mut acc = vec![0.0; state.shell_count()];
    fill_accelerations(
        &state.shell_radius,
        &state.shell_mass,
        &half_enclosed,
        params,
        area,
        &mut acc,
    );
    Ok(acc)
}

/// `S_j`: the shell-discretized value of the enclosed density integral
/// `int_0^{r_j} rho s^(dim-1) ds` (mass below plus half the shell's own).
fn half_enclosed_integrals(masses: &[f64], area: f64) -> Vec<f64> {
    let mut below = 0.0;
    masses
        .iter()
        .map(|&m| {
            let s = (below + 0.5 * m) / area;
            below += m;
            s
        })
        .collect()
}

fn fill_accelerations(
    radii: &[f64],
    masses: &[f64],
    half_enclosed: &[f64],
    params: &ModelParams,
    area: f64,
    out: &mut [f64],
) {
    let sign = params.force.signum();
    let p = params.dim as i32 - 1;
    for (j, a) in out.iter_mut().enumerate() {
        *a = if sign == 0.0 {
            0.0
        } else {
            sign * params.coupling * half_enclosed[j] / radii[j].powi(p)
        };
    }
    if params.pressure_const > 0.0 {
        let volumes = annulus_volumes_raw(radii, params.dim, area);
        let densities: Vec<f64> = masses.iter().zip(&volumes).map(|(m, v)| m / v).collect();
        let drho = numerics::derivative_on_nodes(radii, &densities);
        let kg = params.pressure_const * params.adiabatic_exp;
        let gm = params.adiabatic_exp;
        for (j, a) in out.iter_mut().enumerate() {
            *a -= kg * densities[j].powf(gm - 2.0) * drho[j];
        }
    }
}

/// Advance the shell system one RK4 step without validity checks; the
/// result may be unordered or nonfinite, and callers classify it.
fn advance_unchecked(state: &FluidState, params: &ModelParams, dt: f64) -> FluidState {
    let n = state.shell_count();
    let area = unit_sphere_area(state.dim).expect("dimension validated by caller");
    let half_enclosed = half_enclosed_integrals(&state.shell_mass, area);

    let mut y = Vec::with_capacity(2 * n);
    y.extend_from_slice(&state.shell_radius);
    y.extend_from_slice(&state.shell_velocity);

    let masses = &state.shell_mass;
    let mut deriv = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (r, u) = y.split_at(n);
        dy[..n].copy_from_slice(u);
        fill_accelerations(r, masses, &half_enclosed, params, area, &mut dy[n..]);
    };
    let next = numerics::rk4_vec(state.time, &y, dt, &mut deriv);

    FluidState {
        time: state.time + dt,
        dim: state.dim,
        shell_mass: state.shell_mass.clone(),
        shell_radius: next[..n].to_vec(),
        shell_velocity: next[n..].to_vec(),
    }
}

/// Result of one shell step: either the advanced state or the signal that
/// shells crossed inside the step. Crossing is blowup data, not a failure.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Advanced(FluidState),
    ShellsCrossed { t_before: f64, t_after: f64 },
}

/// One RK4 step of the shell system. Nonfinite values are a numeric
/// failure; a crossing is reported with the bracketing times.
pub fn step(state: &FluidState, params: &ModelParams, dt: f64) -> Result<StepOutcome> {
    state.validate()?;
    if params.dim != state.dim {
        return Err(Error::domain(
            "shell step",
            format!(
                "state dimension {} does not match parameter dimension {}",
                state.dim, params.dim
            ),
        ));
    }
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::domain(
            "shell step",
            format!("dt must be positive, got {dt}"),
        ));
    }
    let candidate = advance_unchecked(state, params, dt);
    if !candidate.all_finite() {
        return Err(Error::NumericFailure {
            time: state.time + dt,
        });
    }
    if !candidate.shells_ordered() {
        return Ok(StepOutcome::ShellsCrossed {
            t_before: state.time,
            t_after: candidate.time,
        });
    }
    Ok(StepOutcome::Advanced(candidate))
}

/// Boundary trajectory of `R'' = sign * M / R^(dim-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmdenTrajectory {
    pub times: Vec<f64>,
    pub radius: Vec<f64>,
    pub radius_dot: Vec<f64>,
    /// First time R reaches the collapse radius, bisection-refined; absent
    /// when the run finishes with R above it.
    pub collapse_time: Option<f64>,
}

/// Integrate the boundary ODE `R'' = sign * M / R^(dim-1)` from
/// `(radius0, velocity0)` with RK4, stopping when R first drops below
/// [`COLLAPSE_RADIUS_FRACTION`] times `radius0` (refined by bisection over
/// the last step) or at `t_end`.
///
/// `mass` is the coupling-scaled enclosed density integral driving the
/// tracked boundary, `coupling * int_0^R rho s^(dim-1) ds`; in 3-D with the
/// default coupling that is exactly the enclosed physical mass.
pub fn emden_boundary(
    radius0: f64,
    velocity0: f64,
    mass: f64,
    params: &ModelParams,
    dt: f64,
    t_end: f64,
) -> Result<EmdenTrajectory> {
    if radius0 <= 0.0 || !radius0.is_finite() {
        return Err(Error::domain(
            "boundary trajectory",
            format!("initial radius must be positive, got {radius0}"),
        ));
    }
    if !velocity0.is_finite() {
        return Err(Error::domain(
            "boundary trajectory",
            "initial velocity must be finite",
        ));
    }
    if mass <= 0.0 || !mass.is_finite() {
        return Err(Error::domain(
            "boundary trajectory",
            format!("mass must be positive, got {mass}"),
        ));
    }
    if dt <= 0.0 || !dt.is_finite() || t_end < 0.0 || !t_end.is_finite() {
        return Err(Error::domain(
            "boundary trajectory",
            "dt must be positive and t_end nonnegative",
        ));
    }
    let sign = params.force.signum();
    let p = params.dim as i32 - 1;
    let law = move |_t: f64, (r, v): (f64, f64)| (v, sign * mass / r.powi(p));
    let collapse_radius = COLLAPSE_RADIUS_FRACTION * radius0;
    let hit = |_t: f64, s: &(f64, f64)| -> bool {
        !s.0.is_finite() || !s.1.is_finite() || s.0 < collapse_radius
    };
    let advance = |t: f64, s: &(f64, f64), h: f64| numerics::rk4_pair(t, *s, h, law);

    let mut trajectory = EmdenTrajectory {
        times: vec![0.0],
        radius: vec![radius0],
        radius_dot: vec![velocity0],
        collapse_time: None,
    };
    let mut t = 0.0;
    let mut s = (radius0, velocity0);
    while t < t_end {
        let remaining = t_end - t;
        if remaining <= dt * 1e-12 {
            break;
        }
        // Merge a sub-half-step tail into the previous step so accumulator
        // drift never produces a degenerate sliver at t_end.
        let h = if remaining < 1.5 * dt { remaining } else { dt };
        let candidate = advance(t, &s, h);
        if hit(t + h, &candidate) {
            match numerics::locate_event(&s, t, h, &advance, &hit, dt * 1e-10) {
                Some((t_hit, s_hit)) => {
                    if !s_hit.0.is_finite() || !s_hit.1.is_finite() {
                        return Err(Error::NumericFailure { time: t_hit });
                    }
                    trajectory.times.push(t_hit);
                    trajectory.radius.push(s_hit.0);
                    trajectory.radius_dot.push(s_hit.1);
                    trajectory.collapse_time = Some(t_hit);
                    return Ok(trajectory);
                }
                None => {
                    // the coarse hit was a step-size artifact
                    if !candidate.0.is_finite() || !candidate.1.is_finite() {
                        return Err(Error::NumericFailure { time: t + h });
                    }
                }
            }
        }
        t += h;
        s = candidate;
        trajectory.times.push(t);
        trajectory.radius.push(s.0);
        trajectory.radius_dot.push(s.1);
    }
    Ok(trajectory)
}

/// Detection thresholds for blowup classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionThresholds {
    /// Divergence diagnostics at or below the negative of this value count
    /// as escape.
    pub divergence_escape: f64,
    /// Outer radius below this fraction of its initial value counts as
    /// support collapse.
    pub min_radius_fraction: f64,
}

impl Default for DetectionThresholds {
    fn default() -> Self {
        DetectionThresholds {
            divergence_escape: 1e9,
            min_radius_fraction: 1e-6,
        }
    }
}

impl DetectionThresholds {
    fn validate(&self) -> Result<()> {
        if self.divergence_escape <= 0.0 || !self.divergence_escape.is_finite() {
            return Err(Error::domain(
                "detection thresholds",
                "divergence escape threshold must be positive",
            ));
        }
        if !self.min_radius_fraction.is_finite()
            || self.min_radius_fraction <= 0.0
            || self.min_radius_fraction >= 1.0
        {
            return Err(Error::domain(
                "detection thresholds",
                "minimum radius fraction must lie in (0, 1)",
            ));
        }
        Ok(())
    }
}

/// What ended a simulation early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupCause {
    ShellCrossing,
    DivergenceEscape,
    RadiusCollapse,
}

impl std::fmt::Display for BlowupCause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BlowupCause::ShellCrossing => "shell-crossing",
            BlowupCause::DivergenceEscape => "divergence-escape",
            BlowupCause::RadiusCollapse => "radius-collapse",
        })
    }
}

/// Time series recorded by [`run_simulation`], one entry per accepted step
/// (the initial state included).
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTrace {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Volume-integrated divergence over the support.
    pub h_integrated: Vec<f64>,
    /// Divergence at the innermost tracked characteristic.
    pub h_pointwise_center: Vec<f64>,
    /// Integration-kind comparison curve seeded from the initial state;
    /// NaN past its singularity.
    pub tan_bound: Vec<f64>,
    /// Pointwise-kind comparison curve seeded from the initial center
    /// divergence; NaN past its singularity.
    pub rational_bound: Vec<f64>,
    pub support_volume: Vec<f64>,
    /// Support volume at t = 0, frozen for the comparison curve.
    pub frozen_volume: f64,
    pub mass: Vec<f64>,
    pub cs_lhs: Vec<f64>,
    pub cs_rhs: Vec<f64>,
    pub min_density: Vec<f64>,
    pub max_density: Vec<f64>,
    /// Center density estimate along the tracked characteristic.
    pub center_density: Vec<f64>,
}

impl DivergenceTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Summary of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub blowup_detected: bool,
    /// Present exactly when a blowup was detected; never past the requested
    /// end time.
    pub blowup_time: Option<f64>,
    pub cause: Option<BlowupCause>,
    /// Closed-form blowup time of the integration-kind comparison curve;
    /// filled only in the attractive pressureless case it covers.
    pub predicted_t_integration: Option<f64>,
    /// `-dim / H0` from the initial center divergence, when negative.
    pub predicted_t_pointwise: Option<f64>,
    pub max_cs_violation: f64,
    /// Largest centered-difference residual of the pointwise comparison
    /// along the center characteristic; NaN when the trace is too short to
    /// difference.
    pub max_riccati_residual: f64,
}

/// March the shell system to `t_end` or the first detected blowup.
///
/// Records the divergence diagnostics each accepted step. Detection checks
/// shell ordering, divergence escape, and support collapse after every
/// step; on a hit the event time is refined by bisection over the last
/// step and classified. Nonfinite states before any threshold fires are a
/// numeric failure.
pub fn run_simulation(
    initial: &FluidState,
    params: &ModelParams,
    dt: f64,
    t_end: f64,
    thresholds: &DetectionThresholds,
) -> Result<(DivergenceTrace, SimulationReport)> {
    initial.validate()?;
    thresholds.validate()?;
    if params.dim != initial.dim {
        return Err(Error::domain(
            "simulation",
            format!(
                "state dimension {} does not match parameter dimension {}",
                initial.dim, params.dim
            ),
        ));
    }
    if dt <= 0.0 || !dt.is_finite() || t_end <= 0.0 || !t_end.is_finite() {
        return Err(Error::domain("simulation", "dt and t_end must be positive"));
    }

    let mass_total = initial.total_mass();
    let frozen_volume = initial.support_volume()?;
    let initial_outer = initial.outer_radius();
    let h0_integrated = functionals::divergence_integral(initial)?;
    let h0_center = functionals::divergence_field(initial)?[0];

    let tan_curve =
        RiccatiBound::integration(h0_integrated, frozen_volume, params.coupling * mass_total)?;
    let rational_curve = RiccatiBound::pointwise(h0_center, initial.dim)?;

    let mut trace = DivergenceTrace {
        dim: initial.dim,
        times: Vec::new(),
        h_integrated: Vec::new(),
        h_pointwise_center: Vec::new(),
        tan_bound: Vec::new(),
        rational_bound: Vec::new(),
        support_volume: Vec::new(),
        frozen_volume,
        mass: Vec::new(),
        cs_lhs: Vec::new(),
        cs_rhs: Vec::new(),
        min_density: Vec::new(),
        max_density: Vec::new(),
        center_density: Vec::new(),
    };
    let record = |state: &FluidState, trace: &mut DivergenceTrace| -> Result<()> {
        let div = functionals::divergence_field(state)?;
        let volumes = state.annulus_volumes()?;
        let h: f64 = div.iter().zip(&volumes).map(|(d, v)| d * v).sum();
        let rhs: f64 = div.iter().zip(&volumes).map(|(d, v)| d * d * v).sum();
        let sv = state.support_volume()?;
        let densities = state.densities()?;
        trace.times.push(state.time);
        trace.h_integrated.push(h);
        trace.h_pointwise_center.push(div[0]);
        trace.tan_bound.push(curve_or_nan(&tan_curve, state.time));
        trace
            .rational_bound
            .push(curve_or_nan(&rational_curve, state.time));
        trace.support_volume.push(sv);
        trace.mass.push(state.total_mass());
        trace.cs_lhs.push(h * h / sv);
        trace.cs_rhs.push(rhs);
        trace
            .min_density
            .push(densities.iter().copied().fold(f64::INFINITY, f64::min));
        trace
            .max_density
            .push(densities.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        trace.center_density.push(state.center_density()?);
        Ok(())
    };

    let escape = thresholds.divergence_escape;
    let min_outer = thresholds.min_radius_fraction * initial_outer;
    let is_event = |s: &FluidState| -> bool {
        if !s.all_finite() || !s.shells_ordered() {
            return true;
        }
        if s.outer_radius() < min_outer {
            return true;
        }
        let div = match functionals::divergence_field(s) {
            Ok(d) => d,
            Err(_) => return true,
        };
        if div[0] <= -escape {
            return true;
        }
        let volumes = annulus_volumes_raw(&s.shell_radius, s.dim, unit_sphere_area(s.dim).unwrap());
        let h: f64 = div.iter().zip(&volumes).map(|(d, v)| d * v).sum();
        h <= -escape
    };
    let advance = |_t: f64, s: &FluidState, h: f64| advance_unchecked(s, params, h);
    let hit = |t: f64, s: &FluidState| {
        let _ = t;
        is_event(s)
    };

    let mut state = initial.clone();
    record(&state, &mut trace)?;
    let mut detection: Option<(BlowupCause, f64)> = None;

    while state.time < t_end {
        let remaining = t_end - state.time;
        if remaining <= dt * 1e-12 {
            break;
        }
        // Merge a sub-half-step tail into the previous step so accumulator
        // drift never produces a degenerate sliver at t_end.
        let h = if remaining < 1.5 * dt { remaining } else { dt };
        let candidate = advance(state.time, &state, h);
        if is_event(&candidate) {
            match numerics::locate_event(&state, state.time, h, &advance, &hit, dt * 1e-10) {
                Some((t_hit, s_hit)) => {
                    if !s_hit.all_finite() {
                        return Err(Error::NumericFailure { time: t_hit });
                    }
                    let cause = if !s_hit.shells_ordered() {
                        BlowupCause::ShellCrossing
                    } else if s_hit.outer_radius() < min_outer {
                        let div = functionals::divergence_field(&s_hit)?;
                        let volumes = s_hit.annulus_volumes()?;
                        let hint: f64 = div.iter().zip(&volumes).map(|(d, v)| d * v).sum();
                        if div[0] <= -escape || hint <= -escape {
                            BlowupCause::DivergenceEscape
                        } else {
                            BlowupCause::RadiusCollapse
                        }
                    } else {
                        BlowupCause::DivergenceEscape
                    };
                    detection = Some((cause, t_hit));
                    break;
                }
                None => {
                    // step-size artifact: only acceptable if the candidate
                    // is itself a valid state
                    candidate.validate().map_err(|_| Error::NumericFailure {
                        time: candidate.time,
                    })?;
                }
            }
        } else if !candidate.all_finite() {
            return Err(Error::NumericFailure {
                time: candidate.time,
            });
        }
        state = candidate;
        record(&state, &mut trace)?;
    }

    let check = verify_bounds(&trace, params, mass_total);
    let (max_cs, max_residual) = match &check {
        Ok(b) => (b.max_cs_violation, b.max_pointwise_residual),
        Err(_) => (
            trace
                .cs_lhs
                .iter()
                .zip(&trace.cs_rhs)
                .map(|(l, r)| l - r)
                .fold(f64::NEG_INFINITY, f64::max),
            f64::NAN,
        ),
    };

    let report = SimulationReport {
        blowup_detected: detection.is_some(),
        blowup_time: detection.map(|(_, t)| t),
        cause: detection.map(|(c, _)| c),
        predicted_t_integration: if params.force == ForceSign::Attractive
            && params.pressure_const == 0.0
        {
            tan_curve.blowup_time()
        } else {
            None
        },
        predicted_t_pointwise: rational_curve.blowup_time(),
        max_cs_violation: max_cs,
        max_riccati_residual: max_residual,
    };
    Ok((trace, report))
}

fn curve_or_nan(curve: &RiccatiBound, t: f64) -> f64 {
    curve.eval(t).unwrap_or(f64::NAN)
}

/// Shell-geometry snapshot used by [`detect_blowup`] for the checks the
/// divergence trace cannot express.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbe {
    pub time: f64,
    pub ordered: bool,
    pub outer_radius: f64,
}

/// Offline blowup classification over a recorded trace plus state probes.
///
/// Returns the earliest of: a divergence diagnostic at or below the
/// negative escape threshold, a probe with broken shell ordering, or a
/// probe whose outer radius fell below the fraction of the initial one.
/// Ties at one time resolve in that priority order (crossing first).
/// `None` means the run completed cleanly.
pub fn detect_blowup(
    trace: &DivergenceTrace,
    probes: &[StateProbe],
    thresholds: &DetectionThresholds,
) -> Option<(BlowupCause, f64)> {
    let escape = thresholds.divergence_escape;
    let mut candidates: Vec<(f64, u8, BlowupCause)> = Vec::new();
    if let Some(k) = (0..trace.len())
        .find(|&k| trace.h_integrated[k] <= -escape || trace.h_pointwise_center[k] <= -escape)
    {
        candidates.push((trace.times[k], 1, BlowupCause::DivergenceEscape));
    }
    if let Some(p) = probes.iter().find(|p| !p.ordered) {
        candidates.push((p.time, 0, BlowupCause::ShellCrossing));
    }
    if let Some(first) = probes.first() {
        let min_outer = thresholds.min_radius_fraction * first.outer_radius;
        if let Some(p) = probes.iter().find(|p| p.outer_radius < min_outer) {
            candidates.push((p.time, 2, BlowupCause::RadiusCollapse));
        }
    }
    candidates
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(t, _, c)| (c, t))
}

/// Residual report from checking a trace against the comparison curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// Largest value of `H_integrated - tan curve` over samples where the
    /// curve is defined; only computed for the attractive pressureless
    /// case the curve covers.
    pub max_tan_bound_excess: Option<f64>,
    /// Largest centered-difference residual of
    /// `dH/dt + H^2/dim - sign * coupling * rho_center` along the center
    /// characteristic.
    pub max_pointwise_residual: f64,
    /// Largest `cs_lhs - cs_rhs` over the trace.
    pub max_cs_violation: f64,
}

/// Check a recorded trace against both comparison curves and the
/// Cauchy-Schwarz columns. The integration-kind curve is reseeded from the
/// trace head, so this works on any trace with at least 3 samples.
pub fn verify_bounds(
    trace: &DivergenceTrace,
    params: &ModelParams,
    mass: f64,
) -> Result<BoundCheck> {
    let m = trace.len();
    if m < 3 {
        return Err(Error::InsufficientData {
            found: m,
            needed: 3,
        });
    }
    if mass <= 0.0 || !mass.is_finite() {
        return Err(Error::domain(
            "bound verification",
            format!("mass must be positive, got {mass}"),
        ));
    }

    let max_tan_bound_excess =
        if params.force == ForceSign::Attractive && params.pressure_const == 0.0 {
            let curve = RiccatiBound::integration(
                trace.h_integrated[0],
                trace.frozen_volume,
                params.coupling * mass,
            )?;
            let mut max_excess = f64::NEG_INFINITY;
            for k in 0..m {
                let bound = curve_or_nan(&curve, trace.times[k]);
                if bound.is_finite() {
                    max_excess = max_excess.max(trace.h_integrated[k] - bound);
                }
            }
            Some(max_excess)
        } else {
            None
        };

    let sign = params.force.signum();
    let n = trace.dim as f64;
    let mut max_residual = f64::NEG_INFINITY;
    for k in 1..m - 1 {
        let dh = numerics::lagrange3_derivative(
            trace.times[k - 1],
            trace.times[k],
            trace.times[k + 1],
            trace.h_pointwise_center[k - 1],
            trace.h_pointwise_center[k],
            trace.h_pointwise_center[k + 1],
            trace.times[k],
        );
        let h = trace.h_pointwise_center[k];
        let residual = dh + h * h / n - sign * params.coupling * trace.center_density[k];
        max_residual = max_residual.max(residual);
    }

    let max_cs_violation = trace
        .cs_lhs
        .iter()
        .zip(&trace.cs_rhs)
        .map(|(l, r)| l - r)
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(BoundCheck {
        max_tan_bound_excess,
        max_pointwise_residual: max_residual,
        max_cs_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_profile, ProfileFamily, ProfileSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    fn profile(family: ProfileFamily, radius: f64, nodes: usize) -> RadialProfile {
        build_profile(&ProfileSpec { family, radius }, nodes).unwrap()
    }

    fn uniform_ball(shells: usize) -> FluidState {
        let density = profile(ProfileFamily::Uniform { amplitude: 1.0 }, 1.0, 4001);
        let rest = profile(ProfileFamily::Uniform { amplitude: 0.0 }, 1.0, 3);
        init_shells(&density, &rest, shells, 3).unwrap()
    }

    fn contracting_ball(shells: usize) -> FluidState {
        let density = profile(ProfileFamily::Uniform { amplitude: 1.0 }, 1.0, 4001);
        let inflow = RadialProfile::new(vec![0.0, 1.0], vec![0.0, -1.0]).unwrap();
        init_shells(&density, &inflow, shells, 3).unwrap()
    }

    /// Free-fall time of R'' = -M/R^2 from rest at r0 down to r_final, via
    /// Simpson quadrature of the energy integral in the angle variable
    /// R = r0 cos^2(theta). Independent of the crate's integrators.
    fn freefall_oracle(r0: f64, mass: f64, r_final: f64) -> f64 {
        let theta_c = (r_final / r0).sqrt().acos();
        let scale = (r0.powi(3) / (2.0 * mass)).sqrt();
        let f = |th: f64| 2.0 * th.cos().powi(2);
        let n = 20_000;
        let h = theta_c / n as f64;
        let mut s = f(0.0) + f(theta_c);
        for k in 1..n {
            s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        scale * s * h / 3.0
    }

    #[test]
    fn equal_mass_shells_partition_the_ball() {
        let state = uniform_ball(100);
        let total: f64 = state.shell_mass.iter().sum();
        assert_relative_eq!(total, 4.0 * PI / 3.0, max_relative = 1e-12);
        assert!(state.shells_ordered());
        for (j, &r) in state.shell_radius.iter().enumerate() {
            let expected = ((j as f64 + 0.5) / 100.0).powf(1.0 / 3.0);
            assert_relative_eq!(r, expected, epsilon = 1e-6);
        }
    }

    #[test]
    fn velocities_sample_the_profile_exactly() {
        let state = contracting_ball(64);
        for (&r, &u) in state.shell_radius.iter().zip(&state.shell_velocity) {
            assert_relative_eq!(u, -r, epsilon = 1e-14);
        }
    }

    #[test]
    fn annulus_volumes_partition_support_exactly() {
        let state = uniform_ball(64);
        let total: f64 = state.annulus_volumes().unwrap().iter().sum();
        assert_relative_eq!(total, state.support_volume().unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn center_density_estimate_is_unbiased_for_uniform_data() {
        let state = uniform_ball(64);
        assert_relative_eq!(state.center_density().unwrap(), 1.0, epsilon = 1e-6);
        // the innermost annulus density carries its constant geometric bias
        let annulus = state.densities().unwrap()[0];
        assert!(
            (annulus - 1.0984).abs() < 1e-3,
            "expected the known midpoint bias, got {annulus}"
        );
    }

    #[test]
    fn init_rejects_bad_inputs() {
        let rest = profile(ProfileFamily::Uniform { amplitude: 0.0 }, 1.0, 3);
        let vacuum = RadialProfile::new(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![1.0, 1.0, 0.0, 1.0, 0.5],
        )
        .unwrap();
        assert!(matches!(
            init_shells(&vacuum, &rest, 16, 3),
            Err(Error::VacuumRegion { .. })
        ));
        let zero = profile(ProfileFamily::Uniform { amplitude: 0.0 }, 1.0, 5);
        assert!(init_shells(&zero, &rest, 16, 3).is_err());
        let fine = profile(ProfileFamily::Uniform { amplitude: 1.0 }, 1.0, 5);
        assert!(init_shells(&fine, &rest, MIN_SHELLS - 1, 3).is_err());
        assert!(init_shells(&fine, &rest, 16, 0).is_err());
    }

    #[test]
    fn rest_state_under_no_force_is_fixed() {
        let state = uniform_ball(32);
        let params = ModelParams::pressureless(3, ForceSign::Free).unwrap();
        match step(&state, &params, 1e-2).unwrap() {
            StepOutcome::Advanced(next) => {
                for (a, b) in next.shell_radius.iter().zip(&state.shell_radius) {
                    assert_relative_eq!(a, b, max_relative = 1e-15);
                }
            }
            other => panic!("expected an advanced state, got {other:?}"),
        }
    }

    #[test]
    fn force_free_contraction_is_exact_over_one_step() {
        let state = contracting_ball(32);
        let params = ModelParams::pressureless(3, ForceSign::Free).unwrap();
        let dt = 1e-3;
        match step(&state, &params, dt).unwrap() {
            StepOutcome::Advanced(next) => {
                for ((rn, r0), u0) in next
                    .shell_radius
                    .iter()
                    .zip(&state.shell_radius)
                    .zip(&state.shell_velocity)
                {
                    assert!(
                        (rn - r0 * (1.0 - dt)).abs() < 1e-12,
                        "radius {rn} vs exact {}",
                        r0 * (1.0 - dt)
                    );
                    let _ = u0;
                }
                for (un, u0) in next.shell_velocity.iter().zip(&state.shell_velocity) {
                    assert_relative_eq!(un, u0, max_relative = 1e-15);
                }
            }
            other => panic!("expected an advanced state, got {other:?}"),
        }
    }

    #[test]
    fn uniform_ball_acceleration_matches_the_interior_field() {
        let state = uniform_ball(200);
        let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
        let acc = shell_accelerations(&state, &params).unwrap();
        for (&r, &a) in state.shell_radius.iter().zip(&acc) {
            assert_relative_eq!(a, -4.0 * PI * r / 3.0, max_relative = 1e-5);
        }
    }

    #[test]
    fn overtaking_shells_signal_a_crossing() {
        let state = FluidState {
            time: 0.0,
            dim: 3,
            shell_mass: vec![0.1; 3],
            shell_radius: vec![1.0, 2.0, 3.0],
            shell_velocity: vec![10.0, 0.0, 0.0],
        };
        let params = ModelParams::pressureless(3, ForceSign::Free).unwrap();
        match step(&state, &params, 0.25).unwrap() {
            StepOutcome::ShellsCrossed { t_before, t_after } => {
                assert_relative_eq!(t_before, 0.0);
                assert_relative_eq!(t_after, 0.25);
            }
            other => panic!("expected a crossing, got {other:?}"),
        }
    }

    #[test]
    fn boundary_ode_quadratic_closed_form() {
        let params = ModelParams::pressureless(1, ForceSign::Attractive).unwrap();
        let out = emden_boundary(1.0, 0.0, 2.0, &params, 1e-3, 2.0).unwrap();
        for (&t, &r) in out.times.iter().zip(&out.radius) {
            if r > 2.0 * COLLAPSE_RADIUS_FRACTION {
                assert_relative_eq!(r, 1.0 - t * t, epsilon = 1e-10);
            }
        }
        let t_collapse = out.collapse_time.expect("constant pull must collapse");
        assert_relative_eq!(t_collapse, (1.0f64 - 1e-6).sqrt(), epsilon = 1e-9);
        assert!((t_collapse - 1.0).abs() < 1e-6);
    }

    #[test]
    fn boundary_ode_repulsive_expands_quadratically() {
        let params = ModelParams::pressureless(1, ForceSign::Repulsive).unwrap();
        let out = emden_boundary(1.0, 0.0, 2.0, &params, 1e-3, 1.5).unwrap();
        assert!(out.collapse_time.is_none());
        assert!(out.radius.windows(2).all(|w| w[1] > w[0]));
        let (&t, &r) = (out.times.last().unwrap(), out.radius.last().unwrap());
        assert_relative_eq!(r, 1.0 + t * t, epsilon = 1e-10);
    }

    #[test]
    fn boundary_ode_inverse_square_free_fall() {
        let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
        let out = emden_boundary(1.0, 0.0, 1.0, &params, 1e-4, 2.0).unwrap();
        let t_collapse = out.collapse_time.expect("attractive fall must collapse");
        let oracle = freefall_oracle(1.0, 1.0, COLLAPSE_RADIUS_FRACTION);
        assert_relative_eq!(oracle, PI / (2.0 * 2.0f64.sqrt()), epsilon = 1e-7);
        assert!(
            (t_collapse - oracle).abs() < 1e-4,
            "collapse {t_collapse} vs oracle {oracle}"
        );
    }

    #[test]
    fn boundary_ode_rejects_bad_arguments() {
        let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
        assert!(emden_boundary(0.0, 0.0, 1.0, &params, 1e-3, 1.0).is_err());
        assert!(emden_boundary(1.0, 0.0, 0.0, &params, 1e-3, 1.0).is_err());
        assert!(emden_boundary(1.0, 0.0, 1.0, &params, 0.0, 1.0).is_err());
        assert!(emden_boundary(1.0, f64::NAN, 1.0, &params, 1e-3, 1.0).is_err());
    }

    #[test]
    fn force_free_run_detects_support_collapse_at_unit_time() {
        let state = contracting_ball(64);
        let params = ModelParams::pressureless(3, ForceSign::Free).unwrap();
        let (trace, report) =
            run_simulation(&state, &params, 1e-3, 2.0, &DetectionThresholds::default()).unwrap();
        assert!(report.blowup_detected);
        let t = report.blowup_time.unwrap();
        assert!((t - 1.0).abs() < 1.1e-6, "blowup at {t}");
        assert_eq!(report.cause, Some(BlowupCause::RadiusCollapse));
        let pointwise = report.predicted_t_pointwise.unwrap();
        assert_relative_eq!(pointwise, 1.0, max_relative = 1e-12);
        assert!(report.predicted_t_integration.is_none());
        // center divergence follows -3/(1-t) exactly
        for (&t, &h) in trace.times.iter().zip(&trace.h_pointwise_center) {
            if t <= 0.95 {
                assert_relative_eq!(h, -3.0 / (1.0 - t), max_relative = 1e-9);
            }
        }
        // the rational comparison curve coincides with it
        for (&h, &b) in trace.h_pointwise_center.iter().zip(&trace.rational_bound) {
            if b.is_finite() {
                assert_relative_eq!(h, b, max_relative = 1e-9);
            }
        }
        // mass column frozen
        for &m in &trace.mass {
            assert_relative_eq!(m, trace.mass[0], max_relative = 1e-12);
        }
    }

    #[test]
    fn force_free_residual_is_discretization_small() {
        let state = contracting_ball(64);
        let params = ModelParams::pressureless(3, ForceSign::Free).unwrap();
        let (trace, report) =
            run_simulation(&state, &params, 1e-4, 0.5, &DetectionThresholds::default()).unwrap();
        assert!(!report.blowup_detected);
        let check = verify_bounds(&trace, &params, state.total_mass()).unwrap();
        assert!(
            check.max_pointwise_residual.abs() < 1e-6,
            "residual {}",
            check.max_pointwise_residual
        );
        assert!(check.max_tan_bound_excess.is_none());
        assert!(check.max_cs_violation < 1e-10);
    }

    #[test]
    fn attractive_ball_collapses_near_the_free_fall_time() {
        let state = uniform_ball(100);
        let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
        let (trace, report) =
            run_simulation(&state, &params, 1e-3, 1.0, &DetectionThresholds::default()).unwrap();
        assert!(report.blowup_detected);
        let t = report.blowup_time.unwrap();
        let oracle = freefall_oracle(1.0, 4.0 * PI / 3.0, 0.0);
        assert!(
            (t - oracle).abs() < 0.01 * oracle,
            "collapse {t} vs free fall {oracle}"
        );
        // the comparison curve's closed-form time for H0 = 0:
        // sqrt(V/F) * pi/2, with V frozen from the outermost shell radius
        let predicted = report.predicted_t_integration.unwrap();
        let v = state.support_volume().unwrap();
        let f = 4.0 * PI * state.total_mass();
        assert_relative_eq!(predicted, (v / f).sqrt() * PI / 2.0, epsilon = 1e-12);
        // and it sits within a shell-resolution factor of the continuum value
        assert_relative_eq!(predicted, PI.sqrt() / 4.0, max_relative = 3e-3);
        assert!(trace.min_density.iter().all(|&d| d > 0.0));
        // equality-case residual: homologous collapse keeps the pointwise
        // comparison tight while the flow is well resolved
        let check = verify_bounds(&trace, &params, state.total_mass()).unwrap();
        assert!(check.max_cs_violation < 1e-9);
    }

    #[test]
    fn homogeneous_collapse_residual_is_small_before_the_plunge() {
        let state = uniform_ball(100);
        let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
        let (trace, report) =
            run_simulation(&state, &params, 1e-4, 0.4, &DetectionThresholds::default()).unwrap();
        assert!(!report.blowup_detected);
        let check = verify_bounds(&trace, &params, state.total_mass()).unwrap();
        assert!(
            check.max_pointwise_residual.abs() < 1e-3,
            "residual {}",
            check.max_pointwise_residual
        );
    }

    #[test]
    fn repulsive_ball_expands_without_detection() {
        let state = uniform_ball(32);
        let params = ModelParams::pressureless(3, ForceSign::Repulsive).unwrap();
        let (trace, report) =
            run_simulation(&state, &params, 1e-2, 5.0, &DetectionThresholds::default()).unwrap();
        assert!(!report.blowup_detected);
        assert!(report.blowup_time.is_none());
        assert!(report.cause.is_none());
        assert!(trace.support_volume.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn trace_times_strictly_increase() {
        let state = uniform_ball(16);
        let params = ModelParams::pressureless(3, ForceSign::Repulsive).unwrap();
        let (trace, _) =
            run_simulation(&state, &params, 1e-2, 0.5, &DetectionThresholds::default()).unwrap();
        assert!(trace.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn offline_detection_matches_the_threshold_contract() {
        let mut trace = DivergenceTrace {
            dim: 3,
            times: vec![0.0, 0.49, 0.98],
            h_integrated: vec![-1.0, -10.0, -100.0],
            h_pointwise_center: vec![-1.0, -10.0, -2e6],
            tan_bound: vec![f64::NAN; 3],
            rational_bound: vec![f64::NAN; 3],
            support_volume: vec![1.0; 3],
            frozen_volume: 1.0,
            mass: vec![1.0; 3],
            cs_lhs: vec![0.0; 3],
            cs_rhs: vec![0.0; 3],
            min_density: vec![1.0; 3],
            max_density: vec![1.0; 3],
            center_density: vec![1.0; 3],
        };
        let thresholds = DetectionThresholds {
            divergence_escape: 1e6,
            min_radius_fraction: 1e-6,
        };
        assert_eq!(
            detect_blowup(&trace, &[], &thresholds),
            Some((BlowupCause::DivergenceEscape, 0.98))
        );

        let probes = [
            StateProbe {
                time: 0.0,
                ordered: true,
                outer_radius: 1.0,
            },
            StateProbe {
                time: 0.5,
                ordered: false,
                outer_radius: 0.5,
            },
        ];
        assert_eq!(
            detect_blowup(&trace, &probes, &thresholds),
            Some((BlowupCause::ShellCrossing, 0.5))
        );

        trace.h_pointwise_center[2] = -10.0;
        let shrink = [
            StateProbe {
                time: 0.0,
                ordered: true,
                outer_radius: 1.0,
            },
            StateProbe {
                time: 0.7,
                ordered: true,
                outer_radius: 5e-7,
            },
        ];
        assert_eq!(
            detect_blowup(&trace, &shrink, &thresholds),
            Some((BlowupCause::RadiusCollapse, 0.7))
        );
        assert_eq!(detect_blowup(&trace, &[], &thresholds), None);
    }

    #[test]
    fn verify_bounds_needs_three_samples() {
        let trace = DivergenceTrace {
            dim: 3,
            times: vec![0.0, 0.1],
            h_integrated: vec![0.0; 2],
            h_pointwise_center: vec![0.0; 2],
            tan_bound: vec![0.0; 2],
            rational_bound: vec![0.0; 2],
            support_volume: vec![1.0; 2],
            frozen_volume: 1.0,
            mass: vec![1.0; 2],
            cs_lhs: vec![0.0; 2],
            cs_rhs: vec![0.0; 2],
            min_density: vec![1.0; 2],
            max_density: vec![1.0; 2],
            center_density: vec![1.0; 2],
        };
        let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
        assert!(matches!(
            verify_bounds(&trace, &params, 1.0),
            Err(Error::InsufficientData {
                found: 2,
                needed: 3
            })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn repulsive_rest_states_never_contract(shells in 8usize..40) {
            let state = uniform_ball(shells);
            let params = ModelParams::pressureless(3, ForceSign::Repulsive).unwrap();
            let mut current = state;
            for _ in 0..20 {
                match step(&current, &params, 1e-2).unwrap() {
                    StepOutcome::Advanced(next) => {
                        prop_assert!(next.outer_radius() >= current.outer_radius());
                        current = next;
                    }
                    other => prop_assert!(false, "unexpected outcome {:?}", other),
                }
            }
        }

        #[test]
        fn radial_cauchy_schwarz_pointwise(
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
            c in -2.0f64..2.0,
            dim in 1usize..6,
        ) {
            // (du/dr)^2 + (dim-1)(u/r)^2 >= (div u)^2 / dim, with equality
            // iff du/dr = u/r; checked on u = r(a + br + cr^2) at r = 1
            let dudr = a + 2.0 * b + 3.0 * c;
            let uoverr = a + b + c;
            let n1 = (dim - 1) as f64;
            let div = dudr + n1 * uoverr;
            let lhs = dudr * dudr + n1 * uoverr * uoverr;
            prop_assert!(lhs >= div * div / dim as f64 - 1e-10);
        }
    }
}
