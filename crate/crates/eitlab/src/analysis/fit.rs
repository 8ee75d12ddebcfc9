//! Least-squares fits: Gaussian profiles, exponential decays, and straight
//! lines, with 1σ uncertainties from the residual scatter.

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Gaussian,
    Exponential,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParam {
    pub name: &'static str,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitFlag {
    /// More than one comparable peak in the frame.
    MultiPeak,
    /// Decay fit on (nearly) constant data: the time constant is infinite.
    InfiniteTimeConstant,
    /// Input carried no usable structure.
    DegenerateInput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub kind: FitKind,
    pub params: Vec<FitParam>,
    /// √(Σ residual²).
    pub residual_norm: f64,
    pub converged: bool,
    pub flags: Vec<FitFlag>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.param(name).map(|p| p.value)
    }
}

pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4; // 2√(2 ln 2)

/// Nonlinear least-squares Gaussian fit `A exp(−(x−µ)²/2σ²)` via
/// Levenberg–Marquardt from a moment-based initial guess. Non-convergence
/// is reported through `converged`, a secondary peak through the
/// `MultiPeak` flag.
pub fn gaussian_profile_fit(x: &[f64], y: &[f64]) -> FitResult {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let fail = |flags: Vec<FitFlag>| FitResult {
        kind: FitKind::Gaussian,
        params: vec![
            FitParam {
                name: "amplitude",
                value: f64::NAN,
                sigma: f64::NAN,
            },
            FitParam {
                name: "center",
                value: f64::NAN,
                sigma: f64::NAN,
            },
            FitParam {
                name: "fwhm",
                value: f64::NAN,
                sigma: f64::NAN,
            },
        ],
        residual_norm: f64::NAN,
        converged: false,
        flags,
    };
    if n < 4 {
        return fail(vec![FitFlag::DegenerateInput]);
    }
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || max - min < 1e-300 || !max.is_finite() {
        return fail(vec![FitFlag::DegenerateInput]);
    }

    let flags = if count_significant_peaks(y) > 1 {
        vec![FitFlag::MultiPeak]
    } else {
        vec![]
    };

    // Moment initial guess on the thresholded signal, so background noise
    // cannot drive the second moment negative.
    let floor = 0.25 * max;
    let total: f64 = y.iter().map(|&yi| (yi - floor).max(0.0)).sum();
    let mean: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| xi * (yi - floor).max(0.0))
        .sum::<f64>()
        / total;
    let var: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (xi - mean).powi(2) * (yi - floor).max(0.0))
        .sum::<f64>()
        / total;
    let span = x[x.len() - 1] - x[0];
    let min_sig = (span / (x.len() as f64)).max(1e-12);
    let mut a = max;
    let mut mu = mean;
    let mut sig = var.sqrt().max(min_sig);

    let chi2 = |a: f64, mu: f64, sig: f64| -> f64 {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let r = yi - a * (-(xi - mu).powi(2) / (2.0 * sig * sig)).exp();
                r * r
            })
            .sum()
    };

    let data_scale: f64 = y.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut prev = chi2(a, mu, sig);
    let mut converged = false;
    for _ in 0..200 {
        if prev <= 1e-24 * data_scale {
            converged = true;
            break;
        }
        // Normal equations JᵀJ and Jᵀr for the three parameters.
        let mut h = [[0.0f64; 3]; 3];
        let mut g = [0.0f64; 3];
        for (&xi, &yi) in x.iter().zip(y) {
            let dx = xi - mu;
            let e = (-dx * dx / (2.0 * sig * sig)).exp();
            let f = a * e;
            let j = [e, f * dx / (sig * sig), f * dx * dx / (sig * sig * sig)];
            let r = yi - f;
            for p in 0..3 {
                g[p] += j[p] * r;
                for q in 0..3 {
                    h[p][q] += j[p] * j[q];
                }
            }
        }
        for p in 0..3 {
            h[p][p] *= 1.0 + lambda;
        }
        let Some(step) = solve3(&h, &g) else {
            break;
        };
        let (na, nmu, nsig) = (a + step[0], mu + step[1], (sig + step[2]).abs().max(1e-12));
        let next = chi2(na, nmu, nsig);
        let step_tiny = step[0].abs() < 1e-9 * a.abs().max(1e-300)
            && step[1].abs() < 1e-9 * sig
            && step[2].abs() < 1e-9 * sig;
        if next <= prev {
            let rel = (prev - next) / prev.max(1e-300);
            a = na;
            mu = nmu;
            sig = nsig;
            prev = next;
            lambda = (lambda * 0.3).max(1e-12);
            if rel < 1e-10 || step_tiny {
                converged = true;
                break;
            }
        } else if step_tiny {
            converged = true;
            break;
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    if !(a.is_finite() && mu.is_finite() && sig.is_finite()) {
        return fail(flags);
    }

    // Uncertainties: residual variance propagated through (JᵀJ)⁻¹.
    let dof = (n as f64 - 3.0).max(1.0);
    let s2 = prev / dof;
    let mut h = [[0.0f64; 3]; 3];
    for (&xi, _) in x.iter().zip(y) {
        let dx = xi - mu;
        let e = (-dx * dx / (2.0 * sig * sig)).exp();
        let f = a * e;
        let j = [e, f * dx / (sig * sig), f * dx * dx / (sig * sig * sig)];
        for p in 0..3 {
            for q in 0..3 {
                h[p][q] += j[p] * j[q];
            }
        }
    }
    let sigmas = invert3_diag(&h).map(|d| {
        [
            (d[0] * s2).max(0.0).sqrt(),
            (d[1] * s2).max(0.0).sqrt(),
            (d[2] * s2).max(0.0).sqrt(),
        ]
    });
    let [sa, smu, ssig] = sigmas.unwrap_or([f64::NAN; 3]);

    FitResult {
        kind: FitKind::Gaussian,
        params: vec![
            FitParam {
                name: "amplitude",
                value: a,
                sigma: sa,
            },
            FitParam {
                name: "center",
                value: mu,
                sigma: smu,
            },
            FitParam {
                name: "fwhm",
                value: FWHM_PER_SIGMA * sig,
                sigma: FWHM_PER_SIGMA * ssig,
            },
        ],
        residual_norm: prev.sqrt(),
        converged,
        flags,
    }
}

/// Count distinct peaks above half maximum on a lightly smoothed profile;
/// two maxima only count separately when the valley between them drops
/// below 60% of the lower one.
fn count_significant_peaks(y: &[f64]) -> usize {
    let n = y.len();
    let w = (n / 40).max(1);
    let smooth: Vec<f64> = (0..n)
        .map(|j| {
            let lo = j.saturating_sub(w);
            let hi = (j + w + 1).min(n);
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let max = smooth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = 0.5 * max;
    let mut maxima: Vec<usize> = Vec::new();
    for j in 1..n.saturating_sub(1) {
        if smooth[j] > floor && smooth[j] > smooth[j - 1] && smooth[j] >= smooth[j + 1] {
            maxima.push(j);
        }
    }
    if maxima.len() <= 1 {
        return maxima.len().max(1);
    }
    let mut clusters: Vec<usize> = vec![maxima[0]];
    for &m in &maxima[1..] {
        let prev = *clusters.last().unwrap();
        let valley = smooth[prev..=m]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if valley < 0.6 * smooth[prev].min(smooth[m]) {
            clusters.push(m);
        } else if smooth[m] > smooth[prev] {
            *clusters.last_mut().unwrap() = m;
        }
    }
    clusters.len()
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut m = *a;
    let mut r = *b;
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
        }
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = r[i];
        for k in i + 1..3 {
            s -= m[i][k] * x[k];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}

/// Diagonal of the inverse of a symmetric 3×3 matrix.
fn invert3_diag(a: &[[f64; 3]; 3]) -> Option<[f64; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let c00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    let c11 = a[0][0] * a[2][2] - a[0][2] * a[2][0];
    let c22 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    Some([c00 / det, c11 / det, c22 / det])
}

/// Weighted least-squares straight line `y = intercept + slope·x` with
/// uncertainties from the residual scatter.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<FitResult, AnalysisError> {
    linear_fit_weighted(x, y, None)
}

fn linear_fit_weighted(
    x: &[f64],
    y: &[f64],
    w: Option<&[f64]>,
) -> Result<FitResult, AnalysisError> {
    let n = x.len();
    if n < 3 {
        return Err(AnalysisError::InsufficientFrames {
            needed: 3,
            found: n,
        });
    }
    let weight = |i: usize| w.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..n).map(weight).sum();
    let sx: f64 = (0..n).map(|i| weight(i) * x[i]).sum();
    let sy: f64 = (0..n).map(|i| weight(i) * y[i]).sum();
    let xbar = sx / sw;
    let ybar = sy / sw;
    let sxx: f64 = (0..n)
        .map(|i| weight(i) * (x[i] - xbar) * (x[i] - xbar))
        .sum();
    let sxy: f64 = (0..n)
        .map(|i| weight(i) * (x[i] - xbar) * (y[i] - ybar))
        .sum();
    if sxx <= 0.0 {
        return Err(AnalysisError::EmptyWindow);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ss_res = 0.0;
    for i in 0..n {
        let r = y[i] - intercept - slope * x[i];
        ss_res += weight(i) * r * r;
    }
    let dof = (n as f64 - 2.0).max(1.0);
    let s2 = ss_res / dof;
    let slope_sigma = (s2 / sxx).sqrt();
    let intercept_sigma = (s2 * (1.0 / sw + xbar * xbar / sxx)).sqrt();
    Ok(FitResult {
        kind: FitKind::Linear,
        params: vec![
            FitParam {
                name: "slope",
                value: slope,
                sigma: slope_sigma,
            },
            FitParam {
                name: "intercept",
                value: intercept,
                sigma: intercept_sigma,
            },
        ],
        residual_norm: ss_res.sqrt(),
        converged: true,
        flags: vec![],
    })
}

/// Exponential time constant of `A(t) = A0 e^{−t/τ}` via weighted
/// log-linear regression (weights A², appropriate for uniform noise on A).
/// Constant data is flagged with an infinite time constant.
pub fn decay_fit(times: &[f64], amplitudes: &[f64]) -> Result<FitResult, AnalysisError> {
    let n = times.len();
    if n < 3 {
        return Err(AnalysisError::InsufficientFrames {
            needed: 3,
            found: n,
        });
    }
    for (&t, &a) in times.iter().zip(amplitudes) {
        if !(a > 0.0) {
            return Err(AnalysisError::NonPositiveAmplitude(t));
        }
    }
    let logs: Vec<f64> = amplitudes.iter().map(|&a| a.ln()).collect();
    let weights: Vec<f64> = amplitudes.iter().map(|&a| a * a).collect();
    let line = linear_fit_weighted(times, &logs, Some(&weights))?;
    let slope = line.value("slope").unwrap();
    let slope_sigma = line.param("slope").unwrap().sigma;
    let a0 = line.value("intercept").unwrap().exp();

    // A slope indistinguishable from zero means no measurable decay.
    let span = times.last().unwrap() - times.first().unwrap();
    if slope.abs() * span < 1e-12 {
        return Ok(FitResult {
            kind: FitKind::Exponential,
            params: vec![
                FitParam {
                    name: "tau",
                    value: f64::INFINITY,
                    sigma: f64::INFINITY,
                },
                FitParam {
                    name: "a0",
                    value: a0,
                    sigma: 0.0,
                },
            ],
            residual_norm: line.residual_norm,
            converged: true,
            flags: vec![FitFlag::InfiniteTimeConstant],
        });
    }
    let tau = -1.0 / slope;
    let tau_sigma = slope_sigma / (slope * slope);
    Ok(FitResult {
        kind: FitKind::Exponential,
        params: vec![
            FitParam {
                name: "tau",
                value: tau,
                sigma: tau_sigma,
            },
            FitParam {
                name: "a0",
                value: a0,
                sigma: f64::NAN,
            },
        ],
        residual_norm: line.residual_norm,
        converged: true,
        flags: vec![],
    })
}
