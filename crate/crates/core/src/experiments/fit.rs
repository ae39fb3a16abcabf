//! Threshold estimation by fitting the finite-size scaling ansatz
//!
//! `P_L = A + B x + C x^2 + D d^(-mu)`, `x = (p - p_th) d^(1/nu)`
//!
//! with Levenberg-Marquardt, weighting each point by its inverse binomial
//! variance. The fit is run with the finite-size term and again with `D = 0`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::CsvRow;
use crate::error::{Error, Result};

pub const MIN_DISTANCES: usize = 3;
pub const MIN_RATES_PER_DISTANCE: usize = 4;

/// One measured logical error rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub d: usize,
    pub p: f64,
    pub failures: u64,
    pub trials: u64,
}

impl FitPoint {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// Binomial variance of the rate, with the rate shrunk towards 1/2 by
    /// one pseudo-count each way so that zero-failure points keep a finite
    /// weight.
    pub fn variance(&self) -> f64 {
        let n = self.trials as f64;
        let q = (self.failures as f64 + 1.0) / (n + 2.0);
        q * (1.0 - q) / n
    }
}

impl From<&CsvRow> for FitPoint {
    fn from(r: &CsvRow) -> Self {
        Self { d: r.d, p: r.p, failures: r.failures, trials: r.trials }
    }
}

/// Parameters of the scaling ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    pub p_th: f64,
    pub nu: f64,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Ansatz {
    pub fn scaled(&self, p: f64, d: usize) -> f64 {
        (p - self.p_th) * (d as f64).powf(1.0 / self.nu)
    }

    pub fn eval(&self, p: f64, d: usize) -> f64 {
        let x = self.scaled(p, d);
        self.a + self.b * x + self.c * x * x + self.d * (d as f64).powf(-self.mu)
    }
}

/// One least-squares solution with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Ansatz,
    /// Standard errors in the order `p_th, nu, mu, A, B, C, D`; zero for
    /// parameters held fixed.
    pub std_errors: [f64; 7],
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
    /// `(y - f) / sigma` per point, in input order.
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn p_th_se(&self) -> f64 {
        self.std_errors[0]
    }

    pub fn reduced_chi2(&self) -> f64 {
        if self.dof == 0 {
            f64::NAN
        } else {
            self.chi2 / self.dof as f64
        }
    }
}

/// Which of the two fits [`ThresholdFit::p_th`] reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    FiniteSize,
    NoFiniteSize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub primary: FitModel,
    /// Fit including `D d^(-mu)`; `None` if it failed.
    pub finite_size: Option<FitResult>,
    /// Fit with `D = 0`.
    pub no_finite_size: FitResult,
    /// Crossing estimate used to start both fits.
    pub crossing: f64,
    pub p_range: (f64, f64),
    /// Non-fatal data warnings, such as non-monotone rates.
    pub warnings: Vec<String>,
}

impl ThresholdFit {
    pub fn primary_fit(&self) -> &FitResult {
        match (self.primary, &self.finite_size) {
            (FitModel::FiniteSize, Some(f)) => f,
            _ => &self.no_finite_size,
        }
    }

    pub fn p_th(&self) -> f64 {
        self.primary_fit().params.p_th
    }

    pub fn p_th_se(&self) -> f64 {
        self.primary_fit().p_th_se()
    }
}

/// Groups points by distance, sorted by `p`.
fn by_distance(points: &[FitPoint]) -> BTreeMap<usize, Vec<FitPoint>> {
    let mut map: BTreeMap<usize, Vec<FitPoint>> = BTreeMap::new();
    for &pt in points {
        map.entry(pt.d).or_default().push(pt);
    }
    for v in map.values_mut() {
        v.sort_by(|a, b| a.p.total_cmp(&b.p));
    }
    map
}

/// Points where the rate drops by more than 3 sigma as `p` grows.
pub fn monotonicity_warnings(points: &[FitPoint]) -> Vec<String> {
    let mut out = Vec::new();
    for (d, pts) in by_distance(points) {
        for w in pts.windows(2) {
            let drop = w[0].rate() - w[1].rate();
            let sigma = (w[0].variance() + w[1].variance()).sqrt();
            if drop > 3.0 * sigma {
                out.push(format!(
                    "d={d}: rate falls from {:.4e} at p={} to {:.4e} at p={}",
                    w[0].rate(),
                    w[0].p,
                    w[1].rate(),
                    w[1].p
                ));
            }
        }
    }
    out
}

/// Mean of the pairwise crossings of linearly interpolated rate curves. Falls
/// back to the grid point where the curves are closest if none cross.
pub fn crossing_estimate(points: &[FitPoint]) -> f64 {
    let groups = by_distance(points);
    let curves: Vec<&Vec<FitPoint>> = groups.values().collect();
    let interp = |c: &[FitPoint], p: f64| -> f64 {
        match c.iter().position(|q| q.p >= p) {
            Some(0) => c[0].rate(),
            Some(i) => {
                let (a, b) = (c[i - 1], c[i]);
                a.rate() + (b.rate() - a.rate()) * (p - a.p) / (b.p - a.p)
            }
            None => c[c.len() - 1].rate(),
        }
    };
    let mut grid: Vec<f64> = points.iter().map(|q| q.p).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut crossings = Vec::new();
    let mut closest = (f64::INFINITY, grid[grid.len() / 2]);
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let diff = |p: f64| interp(curves[j], p) - interp(curves[i], p);
            for w in grid.windows(2) {
                let (f0, f1) = (diff(w[0]), diff(w[1]));
                if f0.abs() < closest.0 {
                    closest = (f0.abs(), w[0]);
                }
                if f0 == 0.0 {
                    crossings.push(w[0]);
                } else if f0 * f1 < 0.0 {
                    crossings.push(w[0] + (w[1] - w[0]) * f0 / (f0 - f1));
                }
            }
        }
    }
    if crossings.is_empty() {
        closest.1
    } else {
        crossings.iter().sum::<f64>() / crossings.len() as f64
    }
}

struct Problem<'a> {
    points: &'a [FitPoint],
    sigma: Vec<f64>,
    finite_size: bool,
}

impl Problem<'_> {
    fn nparams(&self) -> usize {
        if self.finite_size {
            7
        } else {
            5
        }
    }

    /// Weighted least squares for `A, B, C (, D)` with `p_th`, `nu` and `mu`
    /// held fixed. The model is linear in these.
    fn linear_coefficients(&self, p_th: f64, nu: f64, mu: f64) -> Option<Ansatz> {
        let m = self.points.len();
        let k = if self.finite_size { 4 } else { 3 };
        let mut x = DMatrix::zeros(m, k);
        let mut y = DVector::zeros(m);
        for (i, pt) in self.points.iter().enumerate() {
            let s = self.sigma[i];
            let t = (pt.p - p_th) * (pt.d as f64).powf(1.0 / nu);
            x[(i, 0)] = 1.0 / s;
            x[(i, 1)] = t / s;
            x[(i, 2)] = t * t / s;
            if self.finite_size {
                x[(i, 3)] = (pt.d as f64).powf(-mu) / s;
            }
            y[i] = pt.rate() / s;
        }
        let coef = x.svd(true, true).solve(&y, 1e-14).ok()?;
        let a = Ansatz {
            p_th,
            nu,
            mu: if self.finite_size { mu } else { 1.0 },
            a: coef[0],
            b: coef[1],
            c: coef[2],
            d: if self.finite_size { coef[3] } else { 0.0 },
        };
        [a.a, a.b, a.c, a.d].iter().all(|v| v.is_finite()).then_some(a)
    }

    fn residuals(&self, a: &Ansatz) -> DVector<f64> {
        DVector::from_iterator(
            self.points.len(),
            self.points.iter().zip(&self.sigma).map(|(pt, s)| (pt.rate() - a.eval(pt.p, pt.d)) / s),
        )
    }

    /// Jacobian of the model divided by sigma, columns `p_th, nu, A, B, C`
    /// then `mu, D`.
    fn jacobian(&self, a: &Ansatz) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.points.len(), self.nparams());
        for (i, pt) in self.points.iter().enumerate() {
            let s = self.sigma[i];
            let dl = (pt.d as f64).ln();
            let scale = (pt.d as f64).powf(1.0 / a.nu);
            let x = (pt.p - a.p_th) * scale;
            let fs = (pt.d as f64).powf(-a.mu);
            let slope = a.b + 2.0 * a.c * x;
            j[(i, 0)] = -slope * scale / s;
            j[(i, 1)] = -slope * x * dl / (a.nu * a.nu) / s;
            j[(i, 2)] = 1.0 / s;
            j[(i, 3)] = x / s;
            j[(i, 4)] = x * x / s;
            if self.finite_size {
                j[(i, 5)] = -a.d * dl * fs / s;
                j[(i, 6)] = fs / s;
            }
        }
        j
    }

    /// Nonlinear parameters `p_th, ln nu (, t)` mapped to the best
    /// ansatz and its residuals.
    fn profile(&self, theta: &DVector<f64>) -> Option<(Ansatz, DVector<f64>)> {
        let mu = if self.finite_size { mu_from(theta[2]) } else { 1.0 };
        let a = self.linear_coefficients(theta[0], theta[1].exp(), mu)?;
        let r = self.residuals(&a);
        r.iter().all(|v| v.is_finite()).then_some((a, r))
    }

    /// Levenberg-Marquardt on the profiled residuals (variable projection),
    /// with a central-difference Jacobian.
    fn solve(&self, start_p_th: f64, start_mu: f64) -> Result<FitResult> {
        const MAX_ITER: usize = 500;
        let mut theta = if self.finite_size {
            DVector::from_vec(vec![start_p_th, 0.0, mu_to(start_mu)])
        } else {
            DVector::from_vec(vec![start_p_th, 0.0])
        };
        let k = theta.len();
        let (mut best, mut r) =
            self.profile(&theta).ok_or_else(|| Error::FitDegenerate("initial linear fit failed".into()))?;
        let mut chi2 = r.norm_squared();
        let p_scale = start_p_th.abs().max(1e-6);
        let mut lambda = 1e-3;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < MAX_ITER && !converged {
            iterations += 1;
            let mut jac = DMatrix::zeros(r.len(), k);
            for c in 0..k {
                let h = if c == 0 { 1e-6 * p_scale } else { 1e-6 };
                let mut hi = theta.clone();
                let mut lo = theta.clone();
                hi[c] += h;
                lo[c] -= h;
                let (Some((_, rh)), Some((_, rl))) = (self.profile(&hi), self.profile(&lo)) else {
                    return Err(Error::FitNonConvergence("model undefined near the current point".into()));
                };
                jac.set_column(c, &((rh - rl) / (2.0 * h)));
            }
            let jtj = jac.transpose() * &jac;
            let g = jac.transpose() * &r;
            let mut accepted = false;
            while lambda < 1e12 {
                let mut a = jtj.clone();
                for c in 0..k {
                    a[(c, c)] += lambda * jtj[(c, c)].max(1e-300);
                }
                let Some(step) = a.cholesky().map(|ch| -ch.solve(&g)) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial = &theta + &step;
                match self.profile(&trial) {
                    Some((a_t, r_t)) if r_t.norm_squared() <= chi2 => {
                        let chi2_t = r_t.norm_squared();
                        let small_gain = chi2 - chi2_t <= 1e-12 * chi2.max(1e-300);
                        let small_step =
                            step[0].abs() <= 1e-12 * p_scale && step.iter().skip(1).all(|s| s.abs() <= 1e-10);
                        theta = trial;
                        best = a_t;
                        r = r_t;
                        chi2 = chi2_t;
                        lambda = (lambda / 10.0).max(1e-12);
                        accepted = true;
                        converged = small_gain || small_step;
                        break;
                    }
                    _ => lambda *= 10.0,
                }
            }
            if !accepted {
                // No downhill step at any damping: a stationary point.
                converged = true;
            }
        }
        if !converged {
            return Err(Error::FitNonConvergence(format!("no convergence after {MAX_ITER} iterations")));
        }
        let n = self.nparams();
        let dof = self.points.len().saturating_sub(n);
        let j = self.jacobian(&best);
        let cov = (j.transpose() * &j)
            .try_inverse()
            .ok_or_else(|| Error::FitDegenerate("singular normal matrix at the optimum".into()))?;
        let inflate = if dof > 0 { (chi2 / dof as f64).max(1.0) } else { 1.0 };
        let se = |c: usize| (cov[(c, c)] * inflate).max(0.0).sqrt();
        let mut std_errors = [0.0; 7];
        std_errors[0] = se(0);
        std_errors[1] = se(1);
        std_errors[3] = se(2);
        std_errors[4] = se(3);
        std_errors[5] = se(4);
        if self.finite_size {
            std_errors[2] = se(5);
            std_errors[6] = se(6);
        }
        Ok(FitResult { params: best, std_errors, chi2, dof, iterations, residuals: r.iter().copied().collect() })
    }
}

/// Bounds of the finite-size exponent. Outside them `D d^(-mu)` is either
/// collinear with `A` or vanishes at every distance.
const MU_RANGE: (f64, f64) = (0.1, 10.0);

/// Unconstrained coordinate to `mu` in `MU_RANGE` (logistic in `ln mu`).
fn mu_from(t: f64) -> f64 {
    let (lo, hi) = (MU_RANGE.0.ln(), MU_RANGE.1.ln());
    (lo + (hi - lo) / (1.0 + (-t).exp())).exp()
}

fn mu_to(mu: f64) -> f64 {
    let (lo, hi) = (MU_RANGE.0.ln(), MU_RANGE.1.ln());
    let u = ((mu.clamp(MU_RANGE.0 * 1.0001, MU_RANGE.1 / 1.0001).ln() - lo) / (hi - lo)).clamp(1e-9, 1.0 - 1e-9);
    (u / (1.0 - u)).ln()
}

fn check_shape(points: &[FitPoint]) -> Result<()> {
    if let Some(pt) = points.iter().find(|pt| pt.trials == 0 || !pt.p.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid point d={} p={} trials={}", pt.d, pt.p, pt.trials)));
    }
    let groups = by_distance(points);
    if groups.len() < MIN_DISTANCES {
        return Err(Error::FitDegenerate(format!(
            "{} distance(s) present, need at least {MIN_DISTANCES}",
            groups.len()
        )));
    }
    for (d, pts) in &groups {
        let mut ps: Vec<f64> = pts.iter().map(|q| q.p).collect();
        ps.dedup();
        if ps.len() < MIN_RATES_PER_DISTANCE {
            return Err(Error::FitDegenerate(format!(
                "d={d} has {} error rate(s), need at least {MIN_RATES_PER_DISTANCE}",
                ps.len()
            )));
        }
    }
    Ok(())
}

/// Fits with fixed choice of finite-size term, starting from `start_p_th`.
pub fn fit_ansatz(points: &[FitPoint], finite_size: bool, start_p_th: f64) -> Result<FitResult> {
    check_shape(points)?;
    let problem = Problem { points, sigma: points.iter().map(|q| q.variance().sqrt()).collect(), finite_size };
    // The finite-size exponent is poorly constrained; start from several
    // values and keep the best.
    let starts: &[f64] = if finite_size { &[0.5, 1.0, 2.0, 4.0] } else { &[1.0] };
    let mut fit: Option<FitResult> = None;
    let mut last_err = None;
    for &mu in starts {
        match problem.solve(start_p_th, mu) {
            Ok(f) if fit.as_ref().is_none_or(|b| f.chi2 < b.chi2) => fit = Some(f),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    let fit = fit.ok_or_else(|| last_err.expect("at least one start"))?;
    let (b, c) = (fit.params.b, fit.params.c);
    let (sb, sc) = (fit.std_errors[4], fit.std_errors[5]);
    if b.abs() < 2.0 * sb && c.abs() < 2.0 * sc {
        return Err(Error::FitDegenerate(format!(
            "B = {b:.3e} +- {sb:.1e} and C = {c:.3e} +- {sc:.1e} are both consistent with zero: no crossing"
        )));
    }
    Ok(fit)
}

/// Threshold from a table of batch results.
///
/// The finite-size fit is primary when the data supports it: it converged,
/// `p_th` lies in the scanned range, `mu` stays clear of its bounds and `D` differs from
/// zero by more than two standard errors. Otherwise the `D = 0` fit is.
pub fn fit_threshold(points: &[FitPoint]) -> Result<ThresholdFit> {
    check_shape(points)?;
    let mean = points.iter().map(FitPoint::rate).sum::<f64>() / points.len() as f64;
    let spread = points.iter().map(|q| (q.rate() - mean).abs()).fold(0.0, f64::max);
    let noise = points.iter().map(|q| q.variance().sqrt()).fold(f64::INFINITY, f64::min);
    if spread <= 1e-12_f64.max(1e-6 * noise) {
        return Err(Error::FitDegenerate("all rates are equal: no dependence on p or d".into()));
    }
    let lo = points.iter().map(|q| q.p).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|q| q.p).fold(f64::NEG_INFINITY, f64::max);
    let crossing = crossing_estimate(points);
    let no_finite_size = fit_ansatz(points, false, crossing)?;
    let in_range = |f: &FitResult| (lo..=hi).contains(&f.params.p_th);
    let finite_size = fit_ansatz(points, true, crossing).ok();
    let supported = |f: &FitResult| {
        in_range(f)
            && (MU_RANGE.0 * 1.01..=MU_RANGE.1 / 1.01).contains(&f.params.mu)
            && f.params.d.abs() > 2.0 * f.std_errors[6]
    };
    let primary = match &finite_size {
        Some(f) if supported(f) => FitModel::FiniteSize,
        _ => FitModel::NoFiniteSize,
    };
    let mut warnings = monotonicity_warnings(points);
    if !in_range(&no_finite_size) {
        warnings.push(format!(
            "fitted p_th = {:.4e} lies outside the scanned range [{lo}, {hi}]",
            no_finite_size.params.p_th
        ));
    }
    Ok(ThresholdFit { primary, finite_size, no_finite_size, crossing, p_range: (lo, hi), warnings })
}

/// [`fit_threshold`] on CSV rows.
pub fn fit_rows(rows: &[CsvRow]) -> Result<ThresholdFit> {
    fit_threshold(&rows.iter().map(FitPoint::from).collect::<Vec<_>>())
}
