//! Norm functionals: mixed Lebesgue norms, local (on-ball) norms, classical /
//! mixed / generalized-mixed Morrey norms, and three bounded-mean-oscillation
//! variants.
//!
//! The mixed Lebesgue norm iterates one-dimensional integrations, innermost
//! axis first: in 2-D,
//!
//! ```text
//! ||f||_{q} = ( integral ( integral |f(x0, x1)|^q0 dx0 )^(q1/q0) dx1 )^(1/q1)
//! ```
//!
//! Supremum-type functionals (Morrey, BMO, and the weight characteristics in
//! [`crate::weights`]) replace `sup` over all balls by a max over a sampled
//! [`BallGrid`]: centers on a uniform subsample of grid cells, radii geometric
//! from one cell width to the box diameter. Balls that stick out of the box
//! are excluded from suprema and counted, since their on-grid indicator no
//! longer represents the analytic ball. The attained maximum and its argmax
//! ball are reported so refinement sweeps can certify stability.

use crate::grid::{Ball, BoxDomain, ExponentVector, GridFunction};
use crate::phicond::PhiFamily;
use crate::{Error, Result};
use rayon::prelude::*;

/// Geometric radius ladder from `r_min` to `r_max` with `per_decade` steps
/// per factor of 10. The endpoints are always included.
pub fn radius_ladder(r_min: f64, r_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(r_min.is_finite() && r_max.is_finite()) || r_min <= 0.0 || r_max <= r_min {
        return Err(Error::InvalidParameter(format!(
            "radius ladder needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
        )));
    }
    if per_decade == 0 {
        return Err(Error::InvalidParameter(
            "radius ladder needs per_decade >= 1".into(),
        ));
    }
    let steps = ((r_max / r_min).log10() * per_decade as f64).ceil().max(1.0) as usize;
    let ratio = (r_max / r_min).powf(1.0 / steps as f64);
    let mut out = Vec::with_capacity(steps + 1);
    let mut r = r_min;
    for _ in 0..steps {
        out.push(r);
        r *= ratio;
    }
    out.push(r_max);
    Ok(out)
}

/// Configuration of the sampled ball family used for suprema.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BallGridConfig {
    /// Keep every `center_stride`-th cell center per axis.
    pub center_stride: usize,
    /// Radius ladder density.
    pub radii_per_decade: usize,
    /// Smallest radius; defaults to one cell width.
    pub r_min: Option<f64>,
    /// Largest radius; defaults to the box diameter.
    pub r_max: Option<f64>,
}

impl Default for BallGridConfig {
    fn default() -> Self {
        Self {
            center_stride: 4,
            radii_per_decade: 32,
            r_min: None,
            r_max: None,
        }
    }
}

/// Sampled set of candidate balls `(center, radius)` over a box.
///
/// Iteration skips balls that are not contained in the box (they are counted
/// as excluded) and visits the rest in a fixed order, so parallel suprema are
/// deterministic.
#[derive(Debug, Clone)]
pub struct BallGrid {
    domain: BoxDomain,
    dim: usize,
    centers: Vec<f64>, // flattened, dim-strided
    radii: Vec<f64>,
    config_echo: (usize, usize),
}

impl BallGrid {
    pub fn new(domain: &BoxDomain, shape: &[usize], cfg: &BallGridConfig) -> Result<Self> {
        if shape.len() != domain.dim() || shape.iter().any(|n| *n < 2) {
            return Err(Error::InvalidParameter(format!(
                "ball grid needs a valid resolution for the box, got {shape:?}"
            )));
        }
        if cfg.center_stride == 0 {
            return Err(Error::InvalidParameter("center stride must be >= 1".into()));
        }
        let dim = domain.dim();
        let h: Vec<f64> = (0..dim)
            .map(|a| domain.width(a) / shape[a] as f64)
            .collect();
        let axis_centers: Vec<Vec<f64>> = (0..dim)
            .map(|a| {
                (0..shape[a])
                    .step_by(cfg.center_stride)
                    .map(|i| domain.lo()[a] + (i as f64 + 0.5) * h[a])
                    .collect()
            })
            .collect();
        let mut centers = Vec::new();
        match dim {
            1 => centers.extend_from_slice(&axis_centers[0]),
            _ => {
                for y in &axis_centers[1] {
                    for x in &axis_centers[0] {
                        centers.push(*x);
                        centers.push(*y);
                    }
                }
            }
        }
        let h_max = h.iter().cloned().fold(0.0, f64::max);
        let r_min = cfg.r_min.unwrap_or(h_max);
        let r_max = cfg.r_max.unwrap_or_else(|| domain.diameter());
        let radii = radius_ladder(r_min, r_max, cfg.radii_per_decade)?;
        Ok(Self {
            domain: domain.clone(),
            dim,
            centers,
            radii,
            config_echo: (cfg.center_stride, cfg.radii_per_decade),
        })
    }

    /// Ball grid with default configuration for the geometry of `f`.
    pub fn default_for(f: &GridFunction) -> Result<Self> {
        Self::new(f.domain(), f.shape(), &BallGridConfig::default())
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn center_count(&self) -> usize {
        self.centers.len() / self.dim
    }

    /// `(center_stride, radii_per_decade)` used to build the grid.
    pub fn config(&self) -> (usize, usize) {
        self.config_echo
    }

    fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest radius for which a ball at `c` stays inside the box.
    fn fit_radius(&self, c: &[f64]) -> f64 {
        c.iter()
            .zip(self.domain.lo().iter().zip(self.domain.hi()))
            .map(|(x, (a, b))| (x - a).min(b - x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Visits every contained ball sequentially.
    pub fn for_each_contained(&self, mut f: impl FnMut(&[f64], f64)) {
        for ci in 0..self.center_count() {
            let c = self.center(ci);
            let fit = self.fit_radius(c);
            for &r in &self.radii {
                if r > fit {
                    break;
                }
                f(c, r);
            }
        }
    }

    /// Parallel max of `eval` over the contained balls. `eval` returns `None`
    /// for balls it cannot score (empty support); those are counted. The
    /// reduction is a lexicographic max, deterministic under any scheduling.
    pub(crate) fn par_sup<F>(&self, eval: F) -> SupOverBalls
    where
        F: Fn(&[f64], f64) -> Option<f64> + Sync,
    {
        #[derive(Clone, Copy)]
        struct Acc {
            best: Option<(f64, usize, usize)>,
            evaluated: usize,
            empty: usize,
            excluded: usize,
        }
        let merge = |a: Acc, b: Acc| -> Acc {
            let best = match (a.best, b.best) {
                (None, x) | (x, None) => x,
                (Some(x), Some(y)) => {
                    // Higher value wins; ties break toward the smaller index.
                    if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
                        Some(y)
                    } else {
                        Some(x)
                    }
                }
            };
            Acc {
                best,
                evaluated: a.evaluated + b.evaluated,
                empty: a.empty + b.empty,
                excluded: a.excluded + b.excluded,
            }
        };
        let empty_acc = Acc {
            best: None,
            evaluated: 0,
            empty: 0,
            excluded: 0,
        };
        let acc = (0..self.center_count())
            .into_par_iter()
            .map(|ci| {
                let c = self.center(ci);
                let fit = self.fit_radius(c);
                let mut acc = empty_acc;
                for (ri, &r) in self.radii.iter().enumerate() {
                    if r > fit {
                        acc.excluded += self.radii.len() - ri;
                        break;
                    }
                    match eval(c, r) {
                        Some(v) => {
                            acc.evaluated += 1;
                            debug_assert!(!v.is_nan());
                            let cand = (v, ci, ri);
                            acc.best = Some(match acc.best {
                                None => cand,
                                Some(b) => {
                                    if v > b.0 {
                                        cand
                                    } else {
                                        b
                                    }
                                }
                            });
                        }
                        None => acc.empty += 1,
                    }
                }
                acc
            })
            .reduce(|| empty_acc, merge);
        let argmax = acc.best.map(|(_, ci, ri)| Ball {
            center: self.center(ci).to_vec(),
            radius: self.radii[ri],
        });
        SupOverBalls {
            value: acc.best.map(|b| b.0).unwrap_or(0.0),
            argmax,
            evaluated: acc.evaluated,
            empty_support: acc.empty,
            excluded: acc.excluded,
        }
    }
}

/// Result of a supremum over the sampled ball family.
#[derive(Debug, Clone)]
pub struct SupOverBalls {
    /// The attained maximum; 0 when no ball could be scored.
    pub value: f64,
    /// Ball attaining the maximum, if any ball was scored.
    pub argmax: Option<Ball>,
    /// Number of balls scored.
    pub evaluated: usize,
    /// Balls skipped for empty grid support.
    pub empty_support: usize,
    /// Balls skipped because they leave the box.
    pub excluded: usize,
}

/// Precomputed per-row prefix sums of `|f|^q0 * h0`, making local mixed norms
/// O(rows-in-ball) instead of O(cells-in-ball).
pub(crate) struct MixedCache<'a> {
    f: &'a GridFunction,
    q: Vec<f64>,
    prefix: Vec<f64>,
    n0: usize,
    rows: usize,
    h0: f64,
    h1: f64,
}

impl<'a> MixedCache<'a> {
    pub fn new(f: &'a GridFunction, q: &ExponentVector) -> Result<Self> {
        if q.len() != f.dim() {
            return Err(Error::ExponentOutOfRange(format!(
                "exponent vector has {} entries for a {}-dimensional function",
                q.len(),
                f.dim()
            )));
        }
        let n0 = f.shape()[0];
        let rows = if f.dim() == 1 { 1 } else { f.shape()[1] };
        let h0 = f.cell_size(0);
        let h1 = if f.dim() == 1 { 1.0 } else { f.cell_size(1) };
        let q0 = q.entries()[0];
        let values = f.values();
        let mut prefix = vec![0.0; rows * (n0 + 1)];
        for row in 0..rows {
            let base = row * (n0 + 1);
            let vals = &values[row * n0..(row + 1) * n0];
            let mut run = 0.0;
            for (i, v) in vals.iter().enumerate() {
                run += v.abs().powf(q0) * h0;
                prefix[base + i + 1] = run;
            }
            if !run.is_finite() {
                return Err(Error::Overflow(format!(
                    "|f|^{q0} overflowed while accumulating row {row}"
                )));
            }
        }
        Ok(Self {
            f,
            q: q.entries().to_vec(),
            prefix,
            n0,
            rows,
            h0,
            h1,
        })
    }

    /// Mixed norm over the whole box.
    pub fn full_norm(&self) -> Result<f64> {
        let value = match self.q.len() {
            1 => self.prefix[self.n0].powf(1.0 / self.q[0]),
            _ => {
                let e01 = self.q[1] / self.q[0];
                let mut acc = 0.0;
                for row in 0..self.rows {
                    let s = self.prefix[row * (self.n0 + 1) + self.n0];
                    acc += s.powf(e01) * self.h1;
                }
                acc.powf(1.0 / self.q[1])
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Overflow(format!(
                "mixed norm with exponents {:?} overflowed",
                self.q
            )))
        }
    }

    /// Local mixed norm over a ball, `None` when no cell center is inside.
    pub fn local_norm(&self, center: &[f64], r: f64) -> Option<f64> {
        self.local_with_chi(center, r).map(|(f, _)| f)
    }

    /// Local mixed norms of `f * chi_B` and of `chi_B` in one pass.
    pub fn local_with_chi(&self, center: &[f64], r: f64) -> Option<(f64, f64)> {
        let mut count = 0usize;
        match self.q.len() {
            1 => {
                let mut s = 0.0;
                self.f.ball_rows_raw(center, r, |_, i0, i1| {
                    s += self.prefix[i1] - self.prefix[i0];
                    count += i1 - i0;
                });
                (count > 0).then(|| {
                    let inv = 1.0 / self.q[0];
                    (s.powf(inv), (count as f64 * self.h0).powf(inv))
                })
            }
            _ => {
                let e01 = self.q[1] / self.q[0];
                let mut acc_f = 0.0;
                let mut acc_chi = 0.0;
                self.f.ball_rows_raw(center, r, |start, i0, i1| {
                    let row = start / self.n0;
                    let base = row * (self.n0 + 1);
                    let s = self.prefix[base + i1] - self.prefix[base + i0];
                    let cnt = (i1 - i0) as f64;
                    acc_f += s.powf(e01) * self.h1;
                    acc_chi += (cnt * self.h0).powf(e01) * self.h1;
                    count += i1 - i0;
                });
                (count > 0).then(|| {
                    let inv = 1.0 / self.q[1];
                    (acc_f.powf(inv), acc_chi.powf(inv))
                })
            }
        }
    }
}

/// Mixed Lebesgue norm of `f` with exponent vector `q`.
pub fn mixed_norm(f: &GridFunction, q: &ExponentVector) -> Result<f64> {
    MixedCache::new(f, q)?.full_norm()
}

/// Mixed norm of the restriction `f * chi_B`; errors on empty grid support,
/// like [`GridFunction::restrict`].
pub fn local_mixed_norm(f: &GridFunction, q: &ExponentVector, ball: &Ball) -> Result<f64> {
    if ball.dim() != f.dim() {
        return Err(Error::InvalidParameter(format!(
            "ball dimension {} != grid dimension {}",
            ball.dim(),
            f.dim()
        )));
    }
    let cache = MixedCache::new(f, q)?;
    let v = cache
        .local_norm(&ball.center, ball.radius)
        .ok_or_else(|| Error::EmptySupport {
            center: ball.center.clone(),
            radius: ball.radius,
        })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow("local mixed norm overflowed".into()))
    }
}

/// Parameters of the generalized mixed Morrey norm: exponent vector, growth
/// family, and the sampled ball set realizing the supremum.
#[derive(Debug, Clone)]
pub struct MorreyParams {
    pub q: ExponentVector,
    pub phi: PhiFamily,
    pub ball_grid: BallGrid,
}

impl MorreyParams {
    pub fn new(q: ExponentVector, phi: PhiFamily, ball_grid: BallGrid) -> Result<Self> {
        if ball_grid.center_count() == 0 || ball_grid.radii().is_empty() {
            return Err(Error::InvalidParameter("empty ball grid".into()));
        }
        Ok(Self { q, phi, ball_grid })
    }
}

fn check_geometry(f: &GridFunction, grid: &BallGrid) -> Result<()> {
    if f.domain() != grid.domain() {
        return Err(Error::InvalidParameter(
            "ball grid was built for a different box".into(),
        ));
    }
    Ok(())
}

fn finite_sup(sup: SupOverBalls, what: &str) -> Result<SupOverBalls> {
    if sup.value.is_finite() {
        Ok(sup)
    } else {
        Err(Error::Overflow(format!("{what} overflowed")))
    }
}

/// Generalized mixed Morrey norm:
/// `max over balls of phi(r)^-1 * ||chi_B||_q^-1 * ||f chi_B||_q`,
/// with the argmax ball and skip counts reported.
pub fn gen_mixed_morrey_detailed(f: &GridFunction, params: &MorreyParams) -> Result<SupOverBalls> {
    check_geometry(f, &params.ball_grid)?;
    let cache = MixedCache::new(f, &params.q)?;
    let phi = &params.phi;
    let sup = params.ball_grid.par_sup(|c, r| {
        cache
            .local_with_chi(c, r)
            .map(|(fnorm, chinorm)| fnorm / (phi.eval(r) * chinorm))
    });
    finite_sup(sup, "generalized mixed Morrey norm")
}

/// Value-only form of [`gen_mixed_morrey_detailed`].
pub fn gen_mixed_morrey_norm(f: &GridFunction, params: &MorreyParams) -> Result<f64> {
    Ok(gen_mixed_morrey_detailed(f, params)?.value)
}

/// Generalized Morrey norm with a scalar exponent; same code path as the
/// mixed version with a one-entry exponent vector.
pub fn gen_morrey_norm(
    f: &GridFunction,
    q: f64,
    phi: &PhiFamily,
    ball_grid: &BallGrid,
) -> Result<f64> {
    let params = MorreyParams::new(
        ExponentVector::scalar(q)?,
        phi.clone(),
        ball_grid.clone(),
    )?;
    gen_mixed_morrey_norm(f, &params)
}

/// Mixed Morrey norm
/// `max over balls of |B|^(1/p - (1/n) sum 1/q_i) * ||f chi_B||_q` with the
/// analytic ball measure `|B|`. Requires `n/p <= sum 1/q_i`.
pub fn mixed_morrey_detailed(
    f: &GridFunction,
    p: f64,
    q: &ExponentVector,
    ball_grid: &BallGrid,
) -> Result<SupOverBalls> {
    check_geometry(f, ball_grid)?;
    if !p.is_finite() || p < 1.0 {
        return Err(Error::ExponentOutOfRange(format!(
            "need 1 <= p < infinity, got {p}"
        )));
    }
    let n = f.dim() as f64;
    let sigma = q.sum_reciprocal();
    if n / p > sigma + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "mixed Morrey norm requires n/p <= sum 1/q_i, got n/p = {} > {sigma}",
            n / p
        )));
    }
    let cache = MixedCache::new(f, q)?;
    let exponent = 1.0 / p - sigma / n;
    let sup = ball_grid.par_sup(|c, r| {
        let measure = if f.dim() == 1 {
            2.0 * r
        } else {
            std::f64::consts::PI * r * r
        };
        cache
            .local_norm(c, r)
            .map(|fnorm| measure.powf(exponent) * fnorm)
    });
    finite_sup(sup, "mixed Morrey norm")
}

/// Value-only form of [`mixed_morrey_detailed`].
pub fn mixed_morrey_norm(
    f: &GridFunction,
    p: f64,
    q: &ExponentVector,
    ball_grid: &BallGrid,
) -> Result<f64> {
    Ok(mixed_morrey_detailed(f, p, q, ball_grid)?.value)
}

/// A ball together with the mean of a function over it.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BallAverage {
    pub ball: Ball,
    pub mean: f64,
}

/// Mean of `b` over the cells inside `ball`.
pub fn ball_average(b: &GridFunction, ball: &Ball) -> Result<BallAverage> {
    let mean = b.ball_mean(ball).ok_or_else(|| Error::EmptySupport {
        center: ball.center.clone(),
        radius: ball.radius,
    })?;
    Ok(BallAverage {
        ball: ball.clone(),
        mean,
    })
}

/// `|avg_{B(x,r)} b - avg_{B(x,t)} b|` for `0 < 2r < t`; the two-scale average
/// gap that grows at most like `||b||_BMO ln(t/r)`.
pub fn ball_average_gap(b: &GridFunction, x: &[f64], r: f64, t: f64) -> Result<f64> {
    if !(r > 0.0 && 2.0 * r < t) {
        return Err(Error::InvalidParameter(format!(
            "ball average gap needs 0 < 2r < t, got r = {r}, t = {t}"
        )));
    }
    let small = ball_average(b, &Ball::new(x.to_vec(), r)?)?;
    let large = ball_average(b, &Ball::new(x.to_vec(), t)?)?;
    Ok((small.mean - large.mean).abs())
}

enum OscKind<'a> {
    MeanAbs,
    PowerMean(f64),
    Mixed(&'a ExponentVector),
}

fn oscillation_sup(b: &GridFunction, grid: &BallGrid, kind: OscKind) -> Result<f64> {
    check_geometry(b, grid)?;
    let n0 = b.shape()[0];
    let values = b.values();
    // Raw prefix sums of b per row, for O(rows) ball means.
    let rows = if b.dim() == 1 { 1 } else { b.shape()[1] };
    let mut prefix = vec![0.0; rows * (n0 + 1)];
    for row in 0..rows {
        let base = row * (n0 + 1);
        let mut run = 0.0;
        for i in 0..n0 {
            run += values[row * n0 + i];
            prefix[base + i + 1] = run;
        }
    }
    let mean_of = |c: &[f64], r: f64| -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        b.ball_rows_raw(c, r, |start, i0, i1| {
            let base = (start / n0) * (n0 + 1);
            sum += prefix[base + i1] - prefix[base + i0];
            count += i1 - i0;
        });
        (count > 0).then(|| sum / count as f64)
    };
    let h0 = b.cell_size(0);
    let h1 = if b.dim() == 1 { 1.0 } else { b.cell_size(1) };
    let sup = grid.par_sup(|c, r| {
        let m = mean_of(c, r)?;
        match &kind {
            OscKind::MeanAbs => {
                let mut sum = 0.0;
                let mut count = 0usize;
                b.ball_rows_raw(c, r, |start, i0, i1| {
                    for v in &values[start + i0..start + i1] {
                        sum += (v - m).abs();
                    }
                    count += i1 - i0;
                });
                Some(sum / count as f64)
            }
            OscKind::PowerMean(qs) => {
                let mut sum = 0.0;
                let mut count = 0usize;
                b.ball_rows_raw(c, r, |start, i0, i1| {
                    for v in &values[start + i0..start + i1] {
                        sum += (v - m).abs().powf(*qs);
                    }
                    count += i1 - i0;
                });
                Some((sum / count as f64).powf(1.0 / qs))
            }
            OscKind::Mixed(qv) => {
                let q = qv.entries();
                match q.len() {
                    1 => {
                        let mut sum = 0.0;
                        let mut count = 0usize;
                        b.ball_rows_raw(c, r, |start, i0, i1| {
                            for v in &values[start + i0..start + i1] {
                                sum += (v - m).abs().powf(q[0]) * h0;
                            }
                            count += i1 - i0;
                        });
                        let inv = 1.0 / q[0];
                        Some((sum.powf(inv)) / ((count as f64 * h0).powf(inv)))
                    }
                    _ => {
                        let e01 = q[1] / q[0];
                        let mut acc_f = 0.0;
                        let mut acc_chi = 0.0;
                        let mut count = 0usize;
                        b.ball_rows_raw(c, r, |start, i0, i1| {
                            let mut s = 0.0;
                            for v in &values[start + i0..start + i1] {
                                s += (v - m).abs().powf(q[0]) * h0;
                            }
                            let cnt = (i1 - i0) as f64;
                            acc_f += s.powf(e01) * h1;
                            acc_chi += (cnt * h0).powf(e01) * h1;
                            count += i1 - i0;
                        });
                        let inv = 1.0 / q[1];
                        let _ = count;
                        Some(acc_f.powf(inv) / acc_chi.powf(inv))
                    }
                }
            }
        }
    });
    Ok(finite_sup(sup, "oscillation norm")?.value)
}

/// Bounded-mean-oscillation norm:
/// `max over balls of avg_B |b - avg_B b|`.
pub fn bmo_norm(b: &GridFunction, grid: &BallGrid) -> Result<f64> {
    oscillation_sup(b, grid, OscKind::MeanAbs)
}

/// Power-mean oscillation norm
/// `max over balls of (avg_B |b - avg_B b|^q)^(1/q)`, `1 < q < infinity`.
pub fn bmo_q_norm(b: &GridFunction, q: f64, grid: &BallGrid) -> Result<f64> {
    if !q.is_finite() || q <= 1.0 {
        return Err(Error::ExponentOutOfRange(format!(
            "oscillation exponent must satisfy 1 < q < infinity, got {q}"
        )));
    }
    oscillation_sup(b, grid, OscKind::PowerMean(q))
}

/// Mixed-norm oscillation:
/// `max over balls of ||(b - avg_B b) chi_B||_q / ||chi_B||_q`, all `q_i > 1`.
pub fn bmo_mixed_norm(b: &GridFunction, q: &ExponentVector, grid: &BallGrid) -> Result<f64> {
    if q.len() != b.dim() {
        return Err(Error::ExponentOutOfRange(
            "exponent vector rank must match the grid dimension".into(),
        ));
    }
    if q.entries().iter().any(|qi| *qi <= 1.0) {
        return Err(Error::ExponentOutOfRange(
            "mixed oscillation needs every exponent in (1, infinity)".into(),
        ));
    }
    oscillation_sup(b, grid, OscKind::Mixed(q))
}

/// Mixed norm of the unit-ball indicator, `||chi_{B(0,1)}||_q`, from the
/// closed form in 1-D and a fine fixed quadrature in 2-D.
pub fn chi_ball_norm_unit(q: &ExponentVector) -> f64 {
    let e = q.entries();
    match e.len() {
        1 => 2f64.powf(1.0 / e[0]),
        _ => {
            let e01 = e[1] / e[0];
            let m = 1 << 16;
            let h = 2.0 / m as f64;
            let mut acc = 0.0;
            for j in 0..m {
                let t: f64 = -1.0 + (j as f64 + 0.5) * h;
                let chord = 2.0 * (1.0 - t * t).max(0.0).sqrt();
                acc += chord.powf(e01) * h;
            }
            acc.powf(1.0 / e[1])
        }
    }
}

/// Ratio between the two ball normalizations used by Morrey-type norms:
/// `||chi_{B(x,r)}||_q / |B(x,r)|^((1/n) sum 1/q_i)`.
///
/// The ratio is independent of `r` (both sides scale like `r^(sum 1/q_i)`), is
/// exactly 1 in 1-D, and is a bounded constant in 2-D. It quantifies the gap
/// between [`mixed_morrey_norm`] and [`gen_mixed_morrey_norm`] with
/// `phi = |B|^(-1/p)`.
pub fn morrey_normalization_gap(dim: usize, q: &ExponentVector) -> f64 {
    let sigma = q.sum_reciprocal();
    let unit_measure = if dim == 1 { 2.0 } else { std::f64::consts::PI };
    chi_ball_norm_unit(q) / unit_measure.powf(sigma / dim as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Ball, BoxDomain, ExponentVector, GridFunction};
    use approx::assert_relative_eq;

    fn qv(entries: &[f64]) -> ExponentVector {
        ExponentVector::new(entries.to_vec()).unwrap()
    }

    fn chi_interval(a: f64, b: f64) -> impl Fn(&[f64]) -> f64 {
        move |x: &[f64]| {
            if x[0] >= a && x[0] <= b {
                1.0
            } else {
                0.0
            }
        }
    }

    #[test]
    fn unit_square_indicator_norm_is_one() {
        let d = BoxDomain::rect(-2.0, 2.0, -2.0, 2.0).unwrap();
        let f = GridFunction::sample(
            |x| {
                if (0.0..=1.0).contains(&x[0]) && (0.0..=1.0).contains(&x[1]) {
                    1.0
                } else {
                    0.0
                }
            },
            &d,
            &[64, 64],
        )
        .unwrap();
        for q in [qv(&[1.0, 1.0]), qv(&[2.0, 4.0]), qv(&[3.5, 1.5])] {
            assert_relative_eq!(mixed_norm(&f, &q).unwrap(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn separable_product_factorizes() {
        // ||chi_[0,2] (x) chi_[0,3]||_(2,4) = 2^(1/2) * 3^(1/4)
        let d = BoxDomain::rect(-4.0, 4.0, -4.0, 4.0).unwrap();
        let f = GridFunction::sample(
            |x| {
                if (0.0..=2.0).contains(&x[0]) && (0.0..=3.0).contains(&x[1]) {
                    1.0
                } else {
                    0.0
                }
            },
            &d,
            &[64, 64],
        )
        .unwrap();
        let got = mixed_norm(&f, &qv(&[2.0, 4.0])).unwrap();
        assert_relative_eq!(
            got,
            2f64.sqrt() * 3f64.powf(0.25),
            max_relative = 1e-12
        );
    }

    #[test]
    fn interval_indicator_closed_form() {
        let d = BoxDomain::interval(-4.0, 4.0).unwrap();
        let n = 512;
        for (x0, r) in [(0.0, 1.0), (0.5, 0.75), (-1.0, 2.0)] {
            let f = GridFunction::sample(
                |x| {
                    if (x[0] - x0).abs() < r {
                        1.0
                    } else {
                        0.0
                    }
                },
                &d,
                &[n],
            )
            .unwrap();
            for q in [1.0, 2.0, 3.0] {
                let got = mixed_norm(&f, &qv(&[q])).unwrap();
                let expected = (2.0 * r).powf(1.0 / q);
                assert_relative_eq!(got, expected, max_relative = 2e-2);
            }
        }
    }

    #[test]
    fn mixed_norm_overflow_is_reported() {
        let d = BoxDomain::interval(0.0, 1.0).unwrap();
        let f = GridFunction::sample(|_| 1e300, &d, &[8]).unwrap();
        match mixed_norm(&f, &qv(&[3.0])) {
            Err(Error::Overflow(_)) => {}
            other => panic!("expected overflow error, got {other:?}"),
        }
    }

    #[test]
    fn local_norm_examples() {
        let d = BoxDomain::interval(-2.0, 2.0).unwrap();
        let one = GridFunction::sample(|_| 1.0, &d, &[256]).unwrap();
        let b = Ball::new(vec![0.0], 1.0).unwrap();
        assert_relative_eq!(
            local_mixed_norm(&one, &qv(&[2.0]), &b).unwrap(),
            2f64.sqrt(),
            max_relative = 1e-12
        );

        let zero = GridFunction::sample(|_| 0.0, &d, &[256]).unwrap();
        assert_eq!(local_mixed_norm(&zero, &qv(&[2.0]), &b).unwrap(), 0.0);

        // A ball containing the whole support reproduces the global norm.
        let f = GridFunction::sample(chi_interval(-1.0, 1.0), &d, &[256]).unwrap();
        let big = Ball::new(vec![0.0], 1.9).unwrap();
        assert_relative_eq!(
            local_mixed_norm(&f, &qv(&[3.0]), &big).unwrap(),
            mixed_norm(&f, &qv(&[3.0])).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn local_norm_matches_restrict_route() {
        // Dual route: prefix-sum local norm vs restrict + full norm.
        let d = BoxDomain::rect(-2.0, 2.0, -2.0, 2.0).unwrap();
        let f = GridFunction::sample(|x| (x[0] + 0.3).sin() * (1.0 + x[1] * x[1]), &d, &[96, 96])
            .unwrap();
        let q = qv(&[2.0, 3.0]);
        for (c, r) in [([0.1, -0.4], 0.8), ([1.0, 1.0], 1.3), ([0.0, 0.0], 2.0)] {
            let ball = Ball::new(c.to_vec(), r).unwrap();
            let fast = local_mixed_norm(&f, &q, &ball).unwrap();
            let slow = mixed_norm(&f.restrict(&ball).unwrap(), &q).unwrap();
            assert_relative_eq!(fast, slow, max_relative = 1e-9);
        }
    }

    #[test]
    fn dilation_law_is_exact_on_transformed_boxes() {
        let d = BoxDomain::interval(-4.0, 4.0).unwrap();
        let f = GridFunction::sample(|x| (-x[0] * x[0]).exp(), &d, &[512]).unwrap();
        let q = qv(&[3.0]);
        let base = mixed_norm(&f, &q).unwrap();
        for lam in [0.125, 0.5, 1.0, 2.0, 8.0] {
            let g = f.dilate_translate(lam, &[0.0]).unwrap();
            let got = mixed_norm(&g, &q).unwrap();
            assert_relative_eq!(
                got,
                lam.powf(-q.sum_reciprocal()) * base,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn translation_invariance_on_aligned_shifts() {
        let d = BoxDomain::interval(-4.0, 4.0).unwrap();
        let n = 256;
        let h = 8.0 / n as f64;
        let f = GridFunction::sample(chi_interval(-1.0, 1.0), &d, &[n]).unwrap();
        let shifted = GridFunction::sample(chi_interval(-1.0 + 16.0 * h, 1.0 + 16.0 * h), &d, &[n])
            .unwrap();
        let q = qv(&[2.5]);
        assert_relative_eq!(
            mixed_norm(&f, &q).unwrap(),
            mixed_norm(&shifted, &q).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn holder_inequality_on_mixed_spaces() {
        let d = BoxDomain::rect(-2.0, 2.0, -2.0, 2.0).unwrap();
        let q = qv(&[2.0, 4.0]);
        let qc = q.conjugate().unwrap();
        let f = GridFunction::sample(|x| (x[0] - 0.2).cos() * x[1], &d, &[48, 48]).unwrap();
        let g = GridFunction::sample(|x| (x[0] * x[1]).sin() + 0.5, &d, &[48, 48]).unwrap();
        let pairing = f.zip_with(&g, |a, b| a * b).unwrap().integrate();
        let bound = mixed_norm(&f, &q).unwrap() * mixed_norm(&g, &qc).unwrap();
        assert!(pairing.abs() <= bound * (1.0 + 1e-12));

        // Equality for the unit-square indicator against itself.
        let chi = GridFunction::sample(
            |x| {
                if (0.0..=1.0).contains(&x[0]) && (0.0..=1.0).contains(&x[1]) {
                    1.0
                } else {
                    0.0
                }
            },
            &d,
            &[64, 64],
        )
        .unwrap();
        let pairing = chi.zip_with(&chi, |a, b| a * b).unwrap().integrate();
        let bound = mixed_norm(&chi, &q).unwrap() * mixed_norm(&chi, &qc).unwrap();
        assert_relative_eq!(pairing, bound, max_relative = 1e-12);
    }

    #[test]
    fn norm_monotonicity_in_absolute_value() {
        let d = BoxDomain::interval(-3.0, 3.0).unwrap();
        let f = GridFunction::sample(|x| (-x[0] * x[0]).exp() * x[0].sin(), &d, &[256]).unwrap();
        let g = GridFunction::sample(|x| (-x[0] * x[0] / 2.0).exp(), &d, &[256]).unwrap();
        // |f| <= |g| pointwise here.
        for k in 0..f.len() {
            assert!(f.value(k).abs() <= g.value(k).abs() + 1e-15);
        }
        let q = qv(&[2.0]);
        assert!(mixed_norm(&f, &q).unwrap() <= mixed_norm(&g, &q).unwrap());
        let grid = BallGrid::default_for(&f).unwrap();
        assert!(bmo_is_le(&f, &g, &grid));

        fn bmo_is_le(f: &GridFunction, g: &GridFunction, grid: &BallGrid) -> bool {
            // Morrey norms inherit monotonicity from the local norms.
            let phi = PhiFamily::power(0.25).unwrap();
            let pf = MorreyParams::new(qv(&[2.0]), phi.clone(), grid.clone()).unwrap();
            gen_mixed_morrey_norm(f, &pf).unwrap() <= gen_mixed_morrey_norm(g, &pf).unwrap()
        }
    }

    #[test]
    fn gen_morrey_indicator_example() {
        // 1-D: f = chi_(-1,1), phi = (2r)^(-1/2), q = (1): the value is
        // sqrt(2), attained near B(0,1).
        let d = BoxDomain::interval(-4.0, 4.0).unwrap();
        let f = GridFunction::sample(chi_interval(-1.0, 1.0), &d, &[512]).unwrap();
        let grid = BallGrid::default_for(&f).unwrap();
        let phi = PhiFamily::scaled_power(2f64.powf(-0.5), 0.5).unwrap();
        let params = MorreyParams::new(qv(&[1.0]), phi, grid.clone()).unwrap();
        let sup = gen_mixed_morrey_detailed(&f, &params).unwrap();
        assert_relative_eq!(sup.value, 2f64.sqrt(), max_relative = 2e-2);
        let arg = sup.argmax.unwrap();
        assert!(arg.center[0].abs() < 0.1, "argmax center {:?}", arg.center);
        assert!((arg.radius - 1.0).abs() < 0.1, "argmax radius {}", arg.radius);

        // Independent brute force over the same ball family, via restrict +
        // full norm and an explicit on-grid ||chi_B||_1.
        let q = qv(&[1.0]);
        let mut brute = 0.0f64;
        grid.for_each_contained(|c, r| {
            let ball = Ball::new(c.to_vec(), r).unwrap();
            if let Ok(rf) = f.restrict(&ball) {
                let fnorm = mixed_norm(&rf, &q).unwrap();
                let chinorm = f.covered_measure(&ball);
                let phi_inv = (2.0 * r).powf(0.5);
                brute = brute.max(phi_inv * fnorm / chinorm);
            }
        });
        assert_relative_eq!(sup.value, brute, max_relative = 1e-9);
    }

    #[test]
    fn gen_morrey_zero_function() {
        let d = BoxDomain::interval(-4.0, 4.0).unwrap();
        let f = GridFunction::sample(|_| 0.0, &d, &[128]).unwrap();
        let grid = BallGrid::default_for(&f).unwrap();
        let phi = PhiFamily::power(0.5).unwrap();
        let params = MorreyParams::new(qv(&[2.0]), phi, grid).unwrap();
        assert_eq!(gen_mixed_morrey_norm(&f, &params).unwrap(), 0.0);
    }

    #[test]
    fn gen_morrey_norm_canceling_phi_recovers_mixed_norm() {
        // phi(r) = ||chi_B||^-1 makes the norm collapse to sup_B ||f chi_B||,
        // which equals ||f|| once some contained ball covers the support.
        let d = BoxDomain::interval(-4.0, 4.0).unwrap();
        let f = GridFunction::sample(chi_interval(-0.5, 0.5), &d, &[512]).unwrap();
        let q = qv(&[2.0]);
        let grid = BallGrid::default_for(&f).unwrap();
        let cache = MixedCache::new(&f, &q).unwrap();
        let sup = grid.par_sup(|c, r| cache.local_norm(c, r));
        assert_relative_eq!(
            sup.value,
            mixed_norm(&f, &q).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn scalar_morrey_matches_mixed_path() {
        let d = BoxDomain::interval(-4.0, 4.0).unwrap();
        let f = GridFunction::sample(|x| (-x[0].abs()).exp(), &d, &[256]).unwrap();
        let grid = BallGrid::default_for(&f).unwrap();
        let phi = PhiFamily::power(0.25).unwrap();
        let scalar = gen_morrey_norm(&f, 2.0, &phi, &grid).unwrap();
        let params = MorreyParams::new(qv(&[2.0]), phi, grid).unwrap();
        let mixed = gen_mixed_morrey_norm(&f, &params).unwrap();
        assert_relative_eq!(scalar, mixed, max_relative = 1e-6);
    }

    #[test]
    fn mixed_morrey_examples() {
        let d = BoxDomain::interval(-4.0, 4.0).unwrap();
        let f = GridFunction::sample(chi_interval(-1.0, 1.0), &d, &[512]).unwrap();
        let grid = BallGrid::default_for(&f).unwrap();

        // p = q: the Morrey norm reduces to the Lebesgue norm.
        for q in [2.0, 3.0] {
            let got = mixed_morrey_norm(&f, q, &qv(&[q]), &grid).unwrap();
            assert_relative_eq!(got, 2f64.powf(1.0 / q), max_relative = 1e-12);
        }

        // p = 2, q = 1: brute-force value sqrt(2) as in the phi example.
        let got = mixed_morrey_norm(&f, 2.0, &qv(&[1.0]), &grid).unwrap();
        assert_relative_eq!(got, 2f64.sqrt(), max_relative = 2e-2);

        let zero = GridFunction::sample(|_| 0.0, &d, &[512]).unwrap();
        assert_eq!(
            mixed_morrey_norm(&zero, 2.0, &qv(&[1.0]), &grid).unwrap(),
            0.0
        );

        // Constraint n/p <= sum 1/q_i enforced.
        assert!(mixed_morrey_norm(&f, 1.0, &qv(&[2.0]), &grid).is_err());
    }

    #[test]
    fn normalization_gap_diagnostic() {
        assert_relative_eq!(morrey_normalization_gap(1, &qv(&[2.0])), 1.0);
        let gap = morrey_normalization_gap(2, &qv(&[2.0, 4.0]));
        assert!(gap > 0.5 && gap < 2.0, "gap {gap} should be a bounded factor");

        // The two normalizations agree up to the gap on a radial example
        // whose suprema sit at the same balls.
        let d = BoxDomain::rect(-4.0, 4.0, -4.0, 4.0).unwrap();
        let f = GridFunction::sample(
            |x| {
                if x[0] * x[0] + x[1] * x[1] < 1.0 {
                    1.0
                } else {
                    0.0
                }
            },
            &d,
            &[128, 128],
        )
        .unwrap();
        let q = qv(&[2.0, 4.0]);
        let grid = BallGrid::default_for(&f).unwrap();
        let p = 3.0;
        let classic = mixed_morrey_norm(&f, p, &q, &grid).unwrap();
        // phi(r) = |B(0,r)|^(-1/p) = (pi r^2)^(-1/p)
        let phi = PhiFamily::scaled_power(std::f64::consts::PI.powf(-1.0 / p), 2.0 / p).unwrap();
        let params = MorreyParams::new(q.clone(), phi, grid).unwrap();
        let gen = gen_mixed_morrey_norm(&f, &params).unwrap();
        let gap = morrey_normalization_gap(2, &q);
        assert_relative_eq!(classic, gen * gap, max_relative = 0.05);
    }

    #[test]
    fn bmo_constant_is_zero() {
        let d = BoxDomain::interval(-4.0, 4.0).unwrap();
        let b = GridFunction::sample(|_| 3.25, &d, &[256]).unwrap();
        let grid = BallGrid::default_for(&b).unwrap();
        assert_eq!(bmo_norm(&b, &grid).unwrap(), 0.0);
        assert_eq!(bmo_q_norm(&b, 2.0, &grid).unwrap(), 0.0);
        assert_eq!(bmo_mixed_norm(&b, &qv(&[2.0]), &grid).unwrap(), 0.0);
    }

    #[test]
    fn bmo_heaviside_is_half() {
        let d = BoxDomain::interval(-8.0, 8.0).unwrap();
        let b = GridFunction::sample(|x| if x[0] >= 0.0 { 1.0 } else { 0.0 }, &d, &[2048]).unwrap();
        let grid = BallGrid::default_for(&b).unwrap();
        let got = bmo_norm(&b, &grid).unwrap();
        assert_relative_eq!(got, 0.5, max_relative = 0.02);
    }

    #[test]
    fn bmo_variants_on_log_are_comparable() {
        let d = BoxDomain::interval(-8.0, 8.0).unwrap();
        let b = GridFunction::sample(|x| x[0].abs().ln(), &d, &[2048]).unwrap();
        let grid = BallGrid::new(
            b.domain(),
            b.shape(),
            &BallGridConfig {
                center_stride: 8,
                radii_per_decade: 16,
                ..Default::default()
            },
        )
        .unwrap();
        let v1 = bmo_norm(&b, &grid).unwrap();
        let v2 = bmo_q_norm(&b, 2.0, &grid).unwrap();
        let v3 = bmo_mixed_norm(&b, &qv(&[2.0]), &grid).unwrap();
        let max = v1.max(v2).max(v3);
        let min = v1.min(v2).min(v3);
        assert!(min > 0.0 && max / min < 4.0, "variants {v1} {v2} {v3}");
        // In 1-D the mixed variant coincides with the power-mean variant.
        assert_relative_eq!(v2, v3, max_relative = 1e-12);
        // Power-mean dominance, exact on the sampled family.
        assert!(v2 >= v1 - 1e-15);
    }

    #[test]
    fn ball_average_gap_examples() {
        let d = BoxDomain::interval(-16.0, 16.0).unwrap();
        let b = GridFunction::sample(|_| 2.0, &d, &[4096]).unwrap();
        assert_eq!(ball_average_gap(&b, &[0.0], 0.5, 2.0).unwrap(), 0.0);

        // b = ln|x| at x = 0: the average over (-r, r) is ln r - 1, so the
        // gap telescopes to ln(t/r).
        let l = GridFunction::sample(|x| x[0].abs().ln(), &d, &[4096]).unwrap();
        let (r, t) = (0.5, 4.0);
        let got = ball_average_gap(&l, &[0.0], r, t).unwrap();
        assert_relative_eq!(got, (t / r).ln(), max_relative = 1e-2);

        // Heaviside at the jump: both averages are 1/2.
        let h = GridFunction::sample(|x| if x[0] >= 0.0 { 1.0 } else { 0.0 }, &d, &[4096]).unwrap();
        let got = ball_average_gap(&h, &[0.0], 0.5, 4.0).unwrap();
        assert!(got < 1e-12, "gap {got}");

        // Precondition 2r < t.
        assert!(ball_average_gap(&b, &[0.0], 1.0, 1.5).is_err());
    }

    #[test]
    fn ball_grid_counts_exclusions() {
        let d = BoxDomain::interval(-1.0, 1.0).unwrap();
        let grid = BallGrid::new(&d, &[64], &BallGridConfig::default()).unwrap();
        let sup = grid.par_sup(|_, _| Some(1.0));
        assert!(sup.excluded > 0, "diameter-sized radii cannot fit");
        assert!(sup.evaluated > 0);
        assert_eq!(sup.value, 1.0);
    }
}
