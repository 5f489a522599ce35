//! Radial growth families `phi(r)` and the integral conditions that couple a
//! source/target pair `(phi1, phi2)` for the boundedness checks.
//!
//! The supported families are pure powers `c * r^-lambda` and log-corrected
//! powers `c * r^-lambda * (1 + |ln r|)^beta`; both are strictly positive for
//! every `r > 0`. The coupling condition integrates the running tail infimum
//! of `phi1(s) * s^sigma_q` against `t^(-1-sigma)` from `r` upward (optionally
//! with a `1 + ln(t/r)` factor) and compares the result to `phi2(r)` across a
//! sweep of `r`; a divergent sweep is reported as an infinite marker rather
//! than a number.

use crate::grid::ExponentVector;
use crate::{Error, Result};

/// Parametric radial family `phi(r)`, evaluable at any `r > 0`.
///
/// The `x` argument of a general `phi(x, r)` is reserved but not used: every
/// family in this release is radial.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhiFamily {
    kind: PhiKind,
    /// Positive scale coefficient, e.g. `2^(-1/p)` to realize `(2r)^(-1/p)`.
    coeff: f64,
    /// Decay exponent `lambda >= 0` in `r^-lambda`.
    decay: f64,
    /// Exponent of the `(1 + |ln r|)` correction; only for `PowerLog`.
    log_exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PhiKind {
    Power,
    PowerLog,
}

impl PhiFamily {
    /// Pure power `r^-lambda`.
    pub fn power(decay: f64) -> Result<Self> {
        Self::scaled_power(1.0, decay)
    }

    /// Scaled power `coeff * r^-lambda`.
    pub fn scaled_power(coeff: f64, decay: f64) -> Result<Self> {
        Self::build(PhiKind::Power, coeff, decay, 0.0)
    }

    /// Log-corrected power `coeff * r^-lambda * (1 + |ln r|)^beta`.
    pub fn power_log(coeff: f64, decay: f64, log_exponent: f64) -> Result<Self> {
        Self::build(PhiKind::PowerLog, coeff, decay, log_exponent)
    }

    fn build(kind: PhiKind, coeff: f64, decay: f64, log_exponent: f64) -> Result<Self> {
        if !coeff.is_finite() || coeff <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "phi coefficient must be positive and finite, got {coeff}"
            )));
        }
        if !decay.is_finite() || decay < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "phi decay exponent must be finite and >= 0, got {decay}"
            )));
        }
        if !log_exponent.is_finite() {
            return Err(Error::InvalidParameter(
                "phi log exponent must be finite".into(),
            ));
        }
        Ok(Self {
            kind,
            coeff,
            decay,
            log_exponent,
        })
    }

    pub fn kind(&self) -> PhiKind {
        self.kind
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn log_exponent(&self) -> f64 {
        self.log_exponent
    }

    /// Evaluates `phi(r)`; strictly positive for all `r > 0`.
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r > 0.0);
        let base = self.coeff * r.powf(-self.decay);
        match self.kind {
            PhiKind::Power => base,
            PhiKind::PowerLog => base * (1.0 + r.ln().abs()).powf(self.log_exponent),
        }
    }

    /// Parses `"power:<decay>[:<coeff>]"` or `"power_log:<decay>:<beta>[:<coeff>]"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number `{s}` in phi spec")))
        };
        match parts.as_slice() {
            ["power", d] => Self::power(num(d)?),
            ["power", d, c] => Self::scaled_power(num(c)?, num(d)?),
            ["power_log", d, b] => Self::power_log(1.0, num(d)?, num(b)?),
            ["power_log", d, b, c] => Self::power_log(num(c)?, num(d)?, num(b)?),
            _ => Err(Error::InvalidParameter(format!(
                "unrecognized phi spec `{spec}`; expected power:<decay>[:coeff] or power_log:<decay>:<beta>[:coeff]"
            ))),
        }
    }

    /// Short text form, inverse of [`PhiFamily::parse`].
    pub fn describe(&self) -> String {
        match self.kind {
            PhiKind::Power => format!("power:{}:{}", self.decay, self.coeff),
            PhiKind::PowerLog => format!(
                "power_log:{}:{}:{}",
                self.decay, self.log_exponent, self.coeff
            ),
        }
    }
}

/// Outcome of the coupling-condition sweep.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConditionResult {
    /// Supremum over `r` of `integral(r) / phi2(r)`; `f64::INFINITY` when the
    /// sweep is flagged divergent.
    pub sup_ratio: f64,
    /// The `r` attaining the supremum (last sampled `r` when divergent).
    pub argmax_r: f64,
    /// `(r, ratio)` profile across the sweep, for diagnostics and plots.
    pub integrand_profile: Vec<(f64, f64)>,
    /// Set when the tail infimum vanishes in the limit (super-critical decay
    /// of `phi1`), which makes the condition vacuous rather than informative.
    pub vanishing_tail: bool,
}

impl ConditionResult {
    pub fn is_finite(&self) -> bool {
        self.sup_ratio.is_finite()
    }
}

/// Numerical profile of the condition sweep.
#[derive(Debug, Clone)]
pub struct ConditionConfig {
    /// Sweep range for `r` (geometric).
    pub r_min: f64,
    pub r_max: f64,
    pub r_per_decade: usize,
    /// The `t`-integral runs from `r` to `tail_factor * r`; for pure power
    /// families the remainder is added in closed form.
    pub tail_factor: f64,
    pub t_per_decade: usize,
    /// Divergence heuristic: flag when the ratio grows by at least this
    /// factor per decade of `r`, sustained over `sustain_decades`, at either
    /// end of the sweep.
    pub growth_factor: f64,
    pub sustain_decades: f64,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-2,
            r_max: 1e2,
            r_per_decade: 32,
            tail_factor: 1e3,
            t_per_decade: 128,
            growth_factor: 10.0,
            sustain_decades: 2.0,
        }
    }
}

/// Tail infimum `inf { phi1(s) * s^sigma : s in (t, s_max] }` with
/// `sigma = sum_i 1/q_i`.
///
/// For pure power families the map `s -> phi1(s) s^sigma` is monotone, so the
/// infimum is taken in closed form: at the left endpoint when the exponent is
/// nonnegative, at `s_max` (with a vanishing-tail flag, since the true
/// infimum over an unbounded tail is 0) when it is negative. Log-corrected
/// families are scanned on a geometric grid.
pub fn ess_inf_tail(phi1: &PhiFamily, q: &ExponentVector, t: f64, s_max: f64) -> (f64, bool) {
    debug_assert!(t > 0.0 && s_max > t);
    let sigma = q.sum_reciprocal();
    match phi1.kind {
        PhiKind::Power => {
            let e = sigma - phi1.decay;
            if e >= 0.0 {
                (phi1.coeff * t.powf(e), false)
            } else {
                (phi1.coeff * s_max.powf(e), true)
            }
        }
        PhiKind::PowerLog => {
            let per_decade = 128usize;
            let steps = ((s_max / t).log10() * per_decade as f64).ceil().max(1.0) as usize;
            let ratio = (s_max / t).powf(1.0 / steps as f64);
            let mut s = t;
            let mut best = f64::INFINITY;
            for _ in 0..=steps {
                best = best.min(phi1.eval(s) * s.powf(sigma));
                s *= ratio;
            }
            (best, false)
        }
    }
}

/// Evaluates the coupling condition between `phi1` and `phi2`.
///
/// Computes, for each `r` in a geometric sweep,
///
/// ```text
/// ratio(r) = [ integral_r^inf (1 + ln(t/r))^eps * essinf(t) * t^(-1-sigma_p) dt ] / phi2(r)
/// ```
///
/// where `essinf(t)` is [`ess_inf_tail`] of `phi1` with the source exponents
/// `q`, `sigma_p = sum_i 1/p_i` taken from `p` when the fractional variant is
/// requested and from `q` otherwise, and the log factor is present iff
/// `log_factor` is set. Returns the supremum of the ratios, or an infinite
/// marker when the sweep diverges at either end.
pub fn zygmund_condition(
    phi1: &PhiFamily,
    phi2: &PhiFamily,
    q: &ExponentVector,
    p: Option<&ExponentVector>,
    log_factor: bool,
    cfg: &ConditionConfig,
) -> Result<ConditionResult> {
    if let Some(p) = p {
        if p.len() != q.len() {
            return Err(Error::InvalidParameter(
                "target exponent vector must match the source dimension".into(),
            ));
        }
    }
    let sigma_p = p.unwrap_or(q).sum_reciprocal();
    let r_steps = ((cfg.r_max / cfg.r_min).log10() * cfg.r_per_decade as f64).ceil() as usize;
    let r_ratio = (cfg.r_max / cfg.r_min).powf(1.0 / r_steps as f64);

    let mut profile = Vec::with_capacity(r_steps + 1);
    let mut vanishing = false;
    let mut r = cfg.r_min;
    for _ in 0..=r_steps {
        let phi2_r = phi2.eval(r);
        if !(phi2_r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "phi2 must be strictly positive, got {phi2_r} at r = {r}"
            )));
        }
        let (integral, tail_flag) = condition_integral(phi1, q, sigma_p, log_factor, r, cfg);
        vanishing |= tail_flag;
        profile.push((r, integral / phi2_r));
        r *= r_ratio;
    }

    let divergent = sweep_diverges(&profile, cfg);
    let (argmax_r, sup) = profile
        .iter()
        .fold((profile[0].0, 0.0_f64), |(ar, s), (r, v)| {
            if *v > s {
                (*r, *v)
            } else {
                (ar, s)
            }
        });
    Ok(ConditionResult {
        sup_ratio: if divergent { f64::INFINITY } else { sup },
        argmax_r,
        integrand_profile: profile,
        vanishing_tail: vanishing,
    })
}

/// `integral_r^inf (1 + ln(t/r))^eps essinf(t) t^(-1-sigma_p) dt`, truncated
/// at `tail_factor * r` with a closed-form remainder for pure power families.
fn condition_integral(
    phi1: &PhiFamily,
    q: &ExponentVector,
    sigma_p: f64,
    log_factor: bool,
    r: f64,
    cfg: &ConditionConfig,
) -> (f64, bool) {
    let t_max = cfg.tail_factor * r;
    let steps = ((t_max / r).log10() * cfg.t_per_decade as f64).ceil() as usize;
    let ratio = (t_max / r).powf(1.0 / steps as f64);
    let mut vanishing = false;
    let integrand = |t: f64| -> f64 {
        let (essinf, flag) = ess_inf_tail(phi1, q, t, cfg.tail_factor * t);
        let lf = if log_factor { 1.0 + (t / r).ln() } else { 1.0 };
        let _ = flag;
        lf * essinf * t.powf(-1.0 - sigma_p)
    };
    // Track the vanishing-tail flag once at the left endpoint; it is a
    // property of (phi1, q), not of t.
    let (_, flag0) = ess_inf_tail(phi1, q, r, cfg.tail_factor * r);
    vanishing |= flag0;

    let mut sum = 0.0;
    let mut t = r;
    let mut ft = integrand(t);
    for _ in 0..steps {
        let t_next = t * ratio;
        let ft_next = integrand(t_next);
        sum += 0.5 * (ft + ft_next) * (t_next - t);
        t = t_next;
        ft = ft_next;
    }

    // Closed-form tail for pure powers: essinf(t) = c * t^e with
    // e = sigma_q - decay when the infimum sits at the left endpoint.
    if let PhiKind::Power = phi1.kind {
        let sigma_q = q.sum_reciprocal();
        let e = sigma_q - phi1.decay;
        if e >= 0.0 {
            // integrand = c (1 + ln(t/r))^eps t^(e - 1 - sigma_p)
            let s = sigma_p - e; // integral_T^inf t^(-1-s) conversges iff s > 0
            if s > 0.0 {
                let tpow = t_max.powf(-s);
                let plain = phi1.coeff * tpow / s;
                sum += if log_factor {
                    // integral_T^inf (1+ln(t/r)) t^(-1-s) dt
                    //   = T^-s [ (1 + ln(T/r))/s + 1/s^2 ]
                    phi1.coeff * tpow * ((1.0 + (t_max / r).ln()) / s + 1.0 / (s * s))
                } else {
                    plain
                };
            } else {
                // Non-integrable tail: the condition integral is infinite for
                // every r, which the sweep check turns into the marker.
                sum = f64::INFINITY;
            }
        }
        // e < 0: the infimum vanishes in the limit; keep the truncated value
        // and let the vanishing flag surface the issue.
    }
    (sum, vanishing)
}

/// Growth heuristic over the ratio profile: at least `growth_factor` per
/// decade sustained for `sustain_decades`, toward either end of the sweep.
fn sweep_diverges(profile: &[(f64, f64)], cfg: &ConditionConfig) -> bool {
    if profile.len() < 2 {
        return false;
    }
    if profile.iter().any(|(_, v)| !v.is_finite()) {
        return true;
    }
    let span = |a: (f64, f64), b: (f64, f64)| -> Option<f64> {
        // growth factor per decade from a to b
        let decades = (b.0 / a.0).log10().abs();
        (decades > 1e-9 && a.1 > 0.0).then(|| (b.1 / a.1).powf(1.0 / decades))
    };
    let first = profile[0];
    let last = profile[profile.len() - 1];
    let needed = cfg.sustain_decades;
    // Growth toward large r: compare the last point against `needed` decades
    // below it; growth toward small r: first point against `needed` above.
    let toward_large = profile
        .iter()
        .rev()
        .find(|(r, _)| *r <= last.0 / 10f64.powf(needed))
        .and_then(|&a| span(a, last))
        .map(|g| g >= cfg.growth_factor)
        .unwrap_or(false);
    let toward_small = profile
        .iter()
        .find(|(r, _)| *r >= first.0 * 10f64.powf(needed))
        .and_then(|&b| span(b, first))
        .map(|g| g >= cfg.growth_factor)
        .unwrap_or(false);
    toward_large || toward_small
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn qv(entries: &[f64]) -> ExponentVector {
        ExponentVector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn ess_inf_endpoint_cases() {
        let q = qv(&[2.0]); // sigma = 1/2
        let sub = PhiFamily::power(0.25).unwrap();
        let (v, flag) = ess_inf_tail(&sub, &q, 2.0, 2e3);
        assert_relative_eq!(v, 2.0_f64.powf(0.25), max_relative = 1e-12);
        assert!(!flag);

        let sup = PhiFamily::power(0.75).unwrap();
        let (v, flag) = ess_inf_tail(&sup, &q, 2.0, 2e3);
        assert_relative_eq!(v, 2e3_f64.powf(-0.25), max_relative = 1e-12);
        assert!(flag, "super-critical decay must flag the vanishing tail");

        let crit = PhiFamily::power(0.5).unwrap();
        let (v, flag) = ess_inf_tail(&crit, &q, 7.0, 7e3);
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        assert!(!flag);
    }

    #[test]
    fn matched_power_pair_closed_form() {
        // n = 1, p0 = 2: phi1 = phi2 = r^(-1/2), any sigma_q >= 1/2; the
        // integral is (p0/n) r^(-1/2), so sup_ratio = 2.
        let phi = PhiFamily::power(0.5).unwrap();
        let q = qv(&[2.0]);
        let res =
            zygmund_condition(&phi, &phi, &q, None, false, &ConditionConfig::default()).unwrap();
        assert!(res.is_finite());
        assert_relative_eq!(res.sup_ratio, 2.0, max_relative = 1e-3);
    }

    #[test]
    fn log_factor_closed_form_and_dominance() {
        // With the log factor the matched pair gives 1/s + 1/s^2 with s = 1/2:
        // sup_ratio = 2 + 4 = 6.
        let phi = PhiFamily::power(0.5).unwrap();
        let q = qv(&[2.0]);
        let cfg = ConditionConfig::default();
        let plain = zygmund_condition(&phi, &phi, &q, None, false, &cfg).unwrap();
        let logged = zygmund_condition(&phi, &phi, &q, None, true, &cfg).unwrap();
        assert_relative_eq!(logged.sup_ratio, 6.0, max_relative = 1e-3);
        for ((_, a), (_, b)) in plain
            .integrand_profile
            .iter()
            .zip(&logged.integrand_profile)
        {
            assert!(b >= a, "log-factor condition must dominate pointwise");
        }
    }

    #[test]
    fn mismatched_pair_diverges() {
        // phi2 decays slower than the integral: ratio ~ r^(lambda2 - 1/2)
        // blows up as r -> 0.
        let phi1 = PhiFamily::power(0.5).unwrap();
        let phi2 = PhiFamily::power(0.1).unwrap();
        let q = qv(&[2.0]);
        let res =
            zygmund_condition(&phi1, &phi2, &q, None, false, &ConditionConfig::default()).unwrap();
        assert!(res.sup_ratio.is_infinite(), "expected divergence marker");
    }

    #[test]
    fn steeper_phi2_also_diverges() {
        // phi2 decays faster than the integral: ratio ~ r^(0.5 - lambda2)
        // blows up as r -> infinity.
        let phi1 = PhiFamily::power(0.5).unwrap();
        let phi2 = PhiFamily::power(1.0).unwrap();
        let q = qv(&[2.0]);
        let res =
            zygmund_condition(&phi1, &phi2, &q, None, false, &ConditionConfig::default()).unwrap();
        assert!(res.sup_ratio.is_infinite());
    }

    #[test]
    fn fractional_variant_uses_target_exponents() {
        // q = (2), alpha = 1/4 in 1-D: 1/p = 1/4. phi1 = r^-0.4 pairs with
        // phi2 = r^-0.15: integral = c r^(-0.15) with
        // c = 1/(0.4 - 0.25) ... sup_ratio = 1/(lambda1 - alpha) ... here
        // s = sigma_p - (sigma_q - lambda1) = 0.25 - 0.1 = 0.15, so ratio = 1/0.15.
        let phi1 = PhiFamily::power(0.4).unwrap();
        let phi2 = PhiFamily::power(0.15).unwrap();
        let q = qv(&[2.0]);
        let p = qv(&[4.0]);
        let res = zygmund_condition(
            &phi1,
            &phi2,
            &q,
            Some(&p),
            false,
            &ConditionConfig::default(),
        )
        .unwrap();
        assert!(res.is_finite());
        assert_relative_eq!(res.sup_ratio, 1.0 / 0.15, max_relative = 1e-3);
    }

    #[test]
    fn enlarging_phi2_decreases_ratio() {
        let phi1 = PhiFamily::power(0.5).unwrap();
        let q = qv(&[2.0]);
        let cfg = ConditionConfig::default();
        let base = zygmund_condition(&phi1, &phi1, &q, None, false, &cfg).unwrap();
        let bigger = PhiFamily::scaled_power(3.0, 0.5).unwrap();
        let res = zygmund_condition(&phi1, &bigger, &q, None, false, &cfg).unwrap();
        assert!(res.sup_ratio < base.sup_ratio);
        assert_relative_eq!(res.sup_ratio * 3.0, base.sup_ratio, max_relative = 1e-9);
    }

    #[test]
    fn closed_form_agreement_across_sweep() {
        // For the matched pure power pair every profile point equals p0/n.
        let phi = PhiFamily::power(0.5).unwrap();
        let q = qv(&[2.0]);
        let res =
            zygmund_condition(&phi, &phi, &q, None, false, &ConditionConfig::default()).unwrap();
        for (r, v) in &res.integrand_profile {
            assert_relative_eq!(*v, 2.0, max_relative = 1e-3);
            assert!(*r > 0.0);
        }
    }

    #[test]
    fn parse_roundtrip() {
        for spec in ["power:0.5", "power:0.5:0.7071", "power_log:0.25:1.5"] {
            let phi = PhiFamily::parse(spec).unwrap();
            let phi2 = PhiFamily::parse(&phi.describe()).unwrap();
            assert_eq!(phi, phi2);
        }
        assert!(PhiFamily::parse("exp:1").is_err());
        assert!(PhiFamily::parse("power:-1").is_err());
    }
}
