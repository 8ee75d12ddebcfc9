//! Reduced spinwave evolution: advection, optical-depth diffusion, and
//! decay,
//!
//! ```text
//! [∂t + Γ tan²θ (cos2φ ∂ξ − (1/d) ∂ξξ) + γ] S = 0
//! ```
//!
//! used as the semi-analytic oracle for the full Maxwell–Bloch solver. Each
//! step splits into a flux-limited second-order upwind advection substep
//! (sub-cycled to Courant ≤ 0.9), a Crank–Nicolson diffusion solve with
//! zero-gradient boundaries, and an exact `e^{−γ dt}` decay factor. The
//! boundaries are outflow: whatever leaves the domain is gone, matching a
//! polariton emitted from the ensemble.

use ndarray::Array1;
use num_complex::Complex64;

use crate::control::ControlSchedule;
use crate::grid::Grid;
use crate::mixing::mixing_angles;
use crate::params::PhysicalParams;
use crate::record::SpinwaveRecord;

/// Instantaneous coefficients of the reduced equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectionCoefficients {
    /// `Γ tan²θ cos2φ` [ξ/µs].
    pub velocity: f64,
    /// `Γ tan²θ / d` [ξ²/µs].
    pub diffusion: f64,
    /// Spinwave decay γ [rad/µs].
    pub gamma_s: f64,
}

/// Coefficients from the instantaneous control pair of a schedule.
pub fn coefficients_from_schedule(
    schedule: &ControlSchedule,
    params: &PhysicalParams,
    t: f64,
) -> AdvectionCoefficients {
    let (op, om) = schedule.eval(t);
    let angles = mixing_angles(op, om, params);
    AdvectionCoefficients {
        velocity: params.gamma_e * angles.tan2_theta * angles.cos_2phi(),
        diffusion: params.gamma_e * angles.tan2_theta / params.od,
        gamma_s: params.gamma_s,
    }
}

/// Constant-coefficient Gaussian evolution: centroid translates at `v`,
/// variance grows as `σ² = σ0² + 2Dt`, amplitude decays as
/// `A e^{−γt} σ0/σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEvolution {
    pub centroid: f64,
    pub sigma: f64,
    pub amplitude: f64,
    /// Set when centroid ± 3σ leaves [0, 1] and the closed form stops
    /// describing the bounded problem.
    pub boundary_warning: bool,
}

pub fn analytic_gaussian(
    sigma0: f64,
    centroid0: f64,
    amplitude: f64,
    coeffs: &AdvectionCoefficients,
    t: f64,
) -> GaussianEvolution {
    let centroid = centroid0 + coeffs.velocity * t;
    let sigma = (sigma0 * sigma0 + 2.0 * coeffs.diffusion * t).sqrt();
    let amplitude = amplitude * (-coeffs.gamma_s * t).exp() * sigma0 / sigma;
    let boundary_warning = centroid - 3.0 * sigma < 0.0 || centroid + 3.0 * sigma > 1.0;
    GaussianEvolution {
        centroid,
        sigma,
        amplitude,
        boundary_warning,
    }
}

/// One split step of the reduced equation for a real field.
pub fn step_advection_real(
    field: &mut Array1<f64>,
    coeffs: &AdvectionCoefficients,
    dt: f64,
    dxi: f64,
) {
    step_kernel(field.as_slice_mut().expect("contiguous"), coeffs, dt, dxi);
}

/// One split step of the reduced equation for a complex field; the real and
/// imaginary parts evolve independently under the real-coefficient
/// operator.
pub fn step_advection(
    field: &mut Array1<Complex64>,
    coeffs: &AdvectionCoefficients,
    dt: f64,
    dxi: f64,
) {
    let n = field.len();
    let mut re: Vec<f64> = field.iter().map(|c| c.re).collect();
    let mut im: Vec<f64> = field.iter().map(|c| c.im).collect();
    step_kernel(&mut re, coeffs, dt, dxi);
    step_kernel(&mut im, coeffs, dt, dxi);
    for j in 0..n {
        field[j] = Complex64::new(re[j], im[j]);
    }
}

fn step_kernel(u: &mut [f64], coeffs: &AdvectionCoefficients, dt: f64, dxi: f64) {
    if coeffs.velocity != 0.0 {
        advect(u, coeffs.velocity, dt, dxi);
    }
    if coeffs.diffusion > 0.0 {
        diffuse_crank_nicolson(u, coeffs.diffusion, dt, dxi);
    }
    if coeffs.gamma_s != 0.0 {
        let f = (-coeffs.gamma_s * dt).exp();
        for v in u.iter_mut() {
            *v *= f;
        }
    }
}

/// Flux-limited (van Leer) second-order upwind advection, sub-cycled so the
/// Courant number stays below 0.9. A negative velocity reuses the positive
/// kernel on the reversed array, which makes the ±v solutions exact mirror
/// images.
fn advect(u: &mut [f64], v: f64, dt: f64, dxi: f64) {
    if v < 0.0 {
        u.reverse();
        advect(u, -v, dt, dxi);
        u.reverse();
        return;
    }
    let courant_total = v * dt / dxi;
    let n_sub = (courant_total / 0.9).ceil().max(1.0) as usize;
    let c = courant_total / n_sub as f64;
    let n = u.len();
    let mut flux = vec![0.0; n + 1]; // flux[j] is the face between j-1 and j
    for _ in 0..n_sub {
        flux[0] = 0.0; // inflow face: nothing re-enters
        for j in 0..n {
            let upwind_diff = if j > 0 { u[j] - u[j - 1] } else { 0.0 };
            let local_diff = if j + 1 < n { u[j + 1] - u[j] } else { 0.0 };
            let slope = van_leer(upwind_diff, local_diff);
            // Face value on the upwind side with the Lax-Wendroff correction.
            flux[j + 1] = u[j] + 0.5 * (1.0 - c) * slope;
        }
        // Outflow face keeps first-order upwind (slope limited to zero above).
        for j in 0..n {
            u[j] -= c * (flux[j + 1] - flux[j]);
        }
    }
}

fn van_leer(a: f64, b: f64) -> f64 {
    let prod = a * b;
    if prod > 0.0 {
        2.0 * prod / (a + b)
    } else {
        0.0
    }
}

/// Crank–Nicolson step of `∂t u = D ∂ξξ u` with zero-gradient boundaries,
/// solved with the Thomas algorithm. Unconditionally stable and
/// mass-conserving.
fn diffuse_crank_nicolson(u: &mut [f64], d: f64, dt: f64, dxi: f64) {
    let n = u.len();
    let r = d * dt / (dxi * dxi);
    let half = 0.5 * r;
    // Right-hand side (I + r/2 L) u with Neumann ghosts.
    let mut rhs = vec![0.0; n];
    for j in 0..n {
        let left = if j > 0 { u[j - 1] } else { u[0] };
        let right = if j + 1 < n { u[j + 1] } else { u[n - 1] };
        rhs[j] = u[j] + half * (left - 2.0 * u[j] + right);
    }
    // (I - r/2 L) u_next = rhs; Neumann folds the ghost into the diagonal.
    let mut diag = vec![1.0 + r; n];
    diag[0] = 1.0 + half;
    diag[n - 1] = 1.0 + half;
    let off = -half;
    // Thomas forward sweep.
    let mut c_prime = vec![0.0; n];
    c_prime[0] = off / diag[0];
    rhs[0] /= diag[0];
    for j in 1..n {
        let m = diag[j] - off * c_prime[j - 1];
        c_prime[j] = off / m;
        rhs[j] = (rhs[j] - off * rhs[j - 1]) / m;
    }
    u[n - 1] = rhs[n - 1];
    for j in (0..n - 1).rev() {
        u[j] = rhs[j] - c_prime[j] * u[j + 1];
    }
}

/// Evolve a handed-over spinwave profile under the reduced equation from
/// `t_start` to the grid's `t_max`, producing a record in the same format
/// as the full solver (the reduced model has no optical fields, so the
/// detector traces are empty).
///
/// `t_start` is absolute schedule time: the reduced equation has no
/// input-coupling boundary term, so the initial profile is typically taken
/// from the full solver after the pulse has entered.
pub fn run_reduced(
    params: &PhysicalParams,
    schedule: &ControlSchedule,
    initial: &Array1<Complex64>,
    grid: &Grid,
    t_start: f64,
) -> SpinwaveRecord {
    let n = initial.len();
    let dxi = 1.0 / (n - 1) as f64;
    let dt = grid.dt;
    let n_steps = ((grid.t_max - t_start) / dt).round().max(0.0) as usize;
    let strobe_steps = grid.strobe_steps();

    let mut field = initial.clone();
    let mut frames: Vec<f64> = Vec::new();
    let mut times = Vec::new();
    frames.extend(field.iter().map(|c| c.norm()));
    times.push(t_start);

    for step in 0..n_steps {
        let t_mid = t_start + (step as f64 + 0.5) * dt;
        let coeffs = coefficients_from_schedule(schedule, params, t_mid);
        step_advection(&mut field, &coeffs, dt, dxi);
        if (step + 1) % strobe_steps == 0 {
            frames.extend(field.iter().map(|c| c.norm()));
            times.push(t_start + (step + 1) as f64 * dt);
        }
    }

    let n_frames = times.len();
    let s_mag = ndarray::Array2::from_shape_vec((n_frames, n), frames).expect("frame buffer shape");
    let xi = (0..n).map(|j| j as f64 * dxi).collect();
    SpinwaveRecord::from_raw(s_mag, times, xi, vec![], vec![], vec![])
}
