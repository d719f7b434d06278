//! Mutual-information kernels for the binary-input AWGN channel.
//!
//! Everything here is expressed through the consistent-Gaussian functional
//! `J(σ)`: the mutual information between a uniformly distributed bit and an
//! LLR distributed as `N(σ²/2, σ²)` (conditioned on the bit being `+1`).
//!
//! `J` is evaluated from a table built once by Gauss–Legendre quadrature of
//! the defining integral and interpolated with monotone cubic Hermite
//! splines; absolute accuracy is well below `1e-6`. The inverse uses the same
//! table (bracketing search followed by a safeguarded Newton refinement).

use std::collections::BTreeMap;
use std::sync::LazyLock;

use crate::error::{Error, Result};

/// Above this σ the table saturates: `1 - J(σ)` is below `f64` resolution.
const SIGMA_MAX: f64 = 20.0;
const TABLE_STEP: f64 = 0.005;

// 8-point Gauss–Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `log2(1 + e^{-l})`, evaluated without overflow for either sign of `l`.
#[inline]
pub fn log2_one_plus_exp_neg(l: f64) -> f64 {
    if l >= 0.0 {
        (-l).exp().ln_1p() * std::f64::consts::LOG2_E
    } else {
        (-l + l.exp().ln_1p()) * std::f64::consts::LOG2_E
    }
}

/// `E[log2(1 + e^{-L})]` for `L ~ N(σ²/2, σ²)`, i.e. `1 - J(σ)`, by composite
/// Gauss–Legendre quadrature over ±8.5 standard deviations.
pub(crate) fn j_complement_quadrature(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 1.0;
    }
    if sigma > 60.0 {
        return 0.0;
    }
    let mean = 0.5 * sigma * sigma;
    let z_max = 8.5;
    // Resolve both the unit-scale Gaussian and the unit-scale (in l) kernel.
    let width = (0.5f64).min(0.5 / sigma);
    let panels = ((2.0 * z_max) / width).ceil() as usize;
    let h = 2.0 * z_max / panels as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = -z_max + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut panel = 0.0;
        for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            for z in [mid - half * node, mid + half * node] {
                let phi = norm * (-0.5 * z * z).exp();
                panel += weight * phi * log2_one_plus_exp_neg(mean + sigma * z);
            }
        }
        acc += panel * half;
    }
    acc
}

struct JTable {
    values: Vec<f64>,
    slopes: Vec<f64>,
    /// Index of the last strictly increasing table entry below 1.
    last: usize,
}

impl JTable {
    fn build() -> Self {
        let n = (SIGMA_MAX / TABLE_STEP).round() as usize + 1;
        let values: Vec<f64> = (0..n)
            .map(|k| {
                let s = k as f64 * TABLE_STEP;
                (1.0 - j_complement_quadrature(s)).clamp(0.0, 1.0)
            })
            .collect();
        let mut last = 0;
        for k in 1..n {
            if values[k] > values[k - 1] && values[k] < 1.0 {
                last = k;
            } else {
                break;
            }
        }
        // Fritsch–Carlson monotone slopes from central differences.
        let secant: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / TABLE_STEP).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secant[0];
        slopes[n - 1] = secant[n - 2];
        for k in 1..n - 1 {
            let (a, b) = (secant[k - 1], secant[k]);
            slopes[k] = if a * b <= 0.0 { 0.0 } else { 0.5 * (a + b) };
        }
        for k in 0..n - 1 {
            let d = secant[k];
            if d == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            let (a, b) = (slopes[k] / d, slopes[k + 1] / d);
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                slopes[k] = t * a * d;
                slopes[k + 1] = t * b * d;
            }
        }
        JTable { values, slopes, last }
    }

    #[inline]
    fn hermite(&self, k: usize, t: f64) -> f64 {
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * TABLE_STEP, self.slopes[k + 1] * TABLE_STEP);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }

    #[inline]
    fn hermite_dt(&self, k: usize, t: f64) -> f64 {
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * TABLE_STEP, self.slopes[k + 1] * TABLE_STEP);
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1
    }

    #[inline]
    fn eval(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        let x = sigma / TABLE_STEP;
        let k = x as usize;
        if k >= self.last {
            if k >= self.values.len() - 1 {
                return 1.0;
            }
            return self.hermite(k, x - k as f64).min(1.0);
        }
        self.hermite(k, x - k as f64)
    }

    #[inline]
    fn inverse(&self, i: f64) -> f64 {
        if i <= 0.0 {
            return 0.0;
        }
        if i >= 1.0 {
            return f64::INFINITY;
        }
        let vals = &self.values[..=self.last];
        if i >= vals[self.last] {
            return self.last as f64 * TABLE_STEP;
        }
        // First entry strictly greater than i; bracket is [k, k+1].
        let hi = vals.partition_point(|&v| v <= i);
        let k = hi - 1;
        let (y0, y1) = (vals[k], vals[k + 1]);
        let mut t = ((i - y0) / (y1 - y0)).clamp(0.0, 1.0);
        let (mut lo, mut up) = (0.0f64, 1.0f64);
        for _ in 0..8 {
            let f = self.hermite(k, t) - i;
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                up = t;
            } else {
                lo = t;
            }
            let d = self.hermite_dt(k, t);
            let mut next = if d > 0.0 { t - f / d } else { 0.5 * (lo + up) };
            if !(next >= lo && next <= up) {
                next = 0.5 * (lo + up);
            }
            if (next - t).abs() < 1e-13 {
                t = next;
                break;
            }
            t = next;
        }
        (k as f64 + t) * TABLE_STEP
    }
}

static J_TABLE: LazyLock<JTable> = LazyLock::new(JTable::build);

/// Fast `J(σ)` for internal use; `σ = +∞` maps to 1.
#[inline]
pub fn j(sigma: f64) -> f64 {
    J_TABLE.eval(sigma)
}

/// Fast `J^{-1}(i)` for internal use; `i >= 1` maps to `+∞`.
#[inline]
pub fn j_inv(i: f64) -> f64 {
    J_TABLE.inverse(i)
}

/// Squared `J^{-1}`: the "reliability" (LLR variance) of a message with
/// mutual information `i`.
#[inline]
pub fn reliability(i: f64) -> f64 {
    let s = j_inv(i);
    s * s
}

/// Mutual information of a message with reliability `s` (LLR variance).
#[inline]
pub fn info_from_reliability(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        j(s.sqrt())
    }
}

/// Mutual information between a bit and a consistent Gaussian LLR of
/// standard deviation `sigma`.
pub fn j_function(sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("J requires sigma >= 0, got {sigma}")));
    }
    Ok(j(sigma))
}

/// Inverse of [`j_function`]. Perfect information (`i = 1`) has no finite
/// preimage and is reported as [`Error::Saturated`].
pub fn j_inverse(i: f64) -> Result<f64> {
    if i == 1.0 {
        return Err(Error::Saturated);
    }
    if !(0.0..1.0).contains(&i) {
        return Err(Error::Domain(format!("J^-1 requires 0 <= i < 1, got {i}")));
    }
    Ok(j_inv(i))
}

/// Binary-input AWGN channel with BPSK (±1) signaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParam {
    noise_variance: f64,
}

impl ChannelParam {
    pub fn new(noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::Domain(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        Ok(ChannelParam { noise_variance })
    }

    /// Channel for a given Eb/N0 (dB) at code rate `rate`.
    pub fn from_ebn0_db(ebn0_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::Domain(format!("rate must be in (0,1), got {rate}")));
        }
        let lin = 10f64.powf(ebn0_db / 10.0);
        ChannelParam::new(1.0 / (2.0 * rate * lin))
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Variance of the channel LLR, `4/σ_n²`, or 0 for a punctured node.
    pub fn channel_msg_variance(&self, punctured: bool) -> f64 {
        if punctured {
            0.0
        } else {
            4.0 / self.noise_variance
        }
    }
}

/// Capacity (bits per channel use) of the BIAWGN channel.
pub fn biawgn_capacity(chan: ChannelParam) -> f64 {
    let sigma_llr = 2.0 / chan.noise_variance.sqrt();
    1.0 - j_complement_quadrature(sigma_llr)
}

/// Noise variance at which the BIAWGN capacity equals `rate`.
pub fn shannon_noise_for_rate(rate: f64) -> Result<ChannelParam> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Domain(format!("rate must be in (0,1), got {rate}")));
    }
    // Bisection in log-variance; capacity is strictly decreasing in σ_n².
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = biawgn_capacity(ChannelParam { noise_variance: mid.exp() });
        if c > rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    ChannelParam::new((0.5 * (lo + hi)).exp())
}

/// Eb/N0 in dB for unit-energy BPSK at code rate `rate`: `10 log10(1/(2Rσ²))`.
pub fn ebn0_db(chan: ChannelParam, rate: f64) -> f64 {
    10.0 * (1.0 / (2.0 * rate * chan.noise_variance)).log10()
}

/// Shannon-limit Eb/N0 (dB) at `rate`.
pub fn shannon_ebn0_db(rate: f64) -> Result<f64> {
    Ok(ebn0_db(shannon_noise_for_rate(rate)?, rate))
}

/// Gap (dB) between an operating point and the Shannon limit at `rate`.
pub fn gap_db(chan: ChannelParam, rate: f64) -> Result<f64> {
    Ok(ebn0_db(chan, rate) - shannon_ebn0_db(rate)?)
}

/// Edge-perspective degree distribution (λ for variables, ρ for checks).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    entries: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    pub fn new<I: IntoIterator<Item = (usize, f64)>>(entries: I) -> Result<Self> {
        let mut map: BTreeMap<usize, f64> = BTreeMap::new();
        for (d, f) in entries {
            if d == 0 {
                return Err(Error::Invalid("degree 0 in distribution".into()));
            }
            if !(f >= 0.0) || !f.is_finite() {
                return Err(Error::Invalid(format!("fraction for degree {d} is {f}")));
            }
            *map.entry(d).or_insert(0.0) += f;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("fractions sum to {total}, expected 1")));
        }
        Ok(DegreeDistribution {
            entries: map.into_iter().filter(|&(_, f)| f > 0.0).collect(),
        })
    }

    /// All edges on nodes of a single degree.
    pub fn concentrated(degree: usize) -> Result<Self> {
        Self::new([(degree, 1.0)])
    }

    /// Rescales slightly-off fractions (e.g. LP output) to sum exactly to 1.
    pub fn normalized<I: IntoIterator<Item = (usize, f64)>>(entries: I) -> Result<Self> {
        let raw: Vec<(usize, f64)> = entries.into_iter().map(|(d, f)| (d, f.max(0.0))).collect();
        let total: f64 = raw.iter().map(|e| e.1).sum();
        if !(total > 0.0) {
            return Err(Error::Invalid("distribution has no mass".into()));
        }
        Self::new(raw.into_iter().map(|(d, f)| (d, f / total)))
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn max_degree(&self) -> usize {
        self.entries.last().map(|e| e.0).unwrap_or(0)
    }

    pub fn fraction(&self, degree: usize) -> f64 {
        self.entries
            .iter()
            .find(|e| e.0 == degree)
            .map(|e| e.1)
            .unwrap_or(0.0)
    }

    /// `Σ f_d / d`: nodes per edge.
    pub fn nodes_per_edge(&self) -> f64 {
        self.entries.iter().map(|&(d, f)| f / d as f64).sum()
    }

    /// Node-perspective fractions.
    pub fn node_fractions(&self) -> Vec<(usize, f64)> {
        let npe = self.nodes_per_edge();
        self.entries.iter().map(|&(d, f)| (d, f / d as f64 / npe)).collect()
    }
}

/// Variable-node EXIT function: `Σ λ_d J(√((d-1) J^{-1}(I_A)² + σ_ch²))`.
pub fn exit_variable(
    lambda: &DegreeDistribution,
    i_a: f64,
    chan: ChannelParam,
    punctured: bool,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&i_a) {
        return Err(Error::Domain(format!("I_A must lie in [0,1], got {i_a}")));
    }
    if i_a == 1.0 {
        return Ok(1.0);
    }
    let s_a = reliability(i_a);
    let s_ch = chan.channel_msg_variance(punctured);
    Ok(lambda
        .entries()
        .iter()
        .map(|&(d, f)| f * info_from_reliability((d - 1) as f64 * s_a + s_ch))
        .sum())
}

/// Check-node EXIT function: `1 - Σ ρ_d J(√(d-1) J^{-1}(1 - I_A))`.
pub fn exit_check(rho: &DegreeDistribution, i_a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&i_a) {
        return Err(Error::Domain(format!("I_A must lie in [0,1], got {i_a}")));
    }
    let s = reliability(1.0 - i_a);
    if s.is_infinite() {
        // Every check of degree >= 2 sees an unusable input.
        return Ok(rho
            .entries()
            .iter()
            .map(|&(d, f)| if d == 1 { f } else { 0.0 })
            .sum());
    }
    Ok(1.0
        - rho
            .entries()
            .iter()
            .map(|&(d, f)| f * info_from_reliability((d - 1) as f64 * s))
            .sum::<f64>())
}

/// Check-node combining in the reliability domain: given the reliabilities of
/// the other incoming messages, returns the outgoing mutual information.
#[inline]
pub fn check_combine(dual_sum: f64) -> f64 {
    1.0 - info_from_reliability(dual_sum)
}

/// Dual reliability `J^{-1}(1 - I)²` used by check-node combining.
#[inline]
pub fn dual_reliability(i: f64) -> f64 {
    reliability(1.0 - i)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: trapezoid rule on a wide, fine grid in the LLR domain.
    fn j_trapezoid(sigma: f64) -> f64 {
        let mean = 0.5 * sigma * sigma;
        let (a, b) = (mean - 14.0 * sigma, mean + 14.0 * sigma);
        let n = 400_000;
        let h = (b - a) / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let l = a + k as f64 * h;
            let z = (l - mean) / sigma;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            acc += w * (-0.5 * z * z).exp() * log2_one_plus_exp_neg(l);
        }
        1.0 - acc * h / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    #[test]
    fn j_endpoints() {
        assert_eq!(j_function(0.0).unwrap(), 0.0);
        assert!((j_function(50.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(j_function(-0.1).is_err());
    }

    #[test]
    fn j_matches_trapezoid_oracle() {
        for &s in &[0.05, 0.3, 1.0, 2.0, 3.3, 5.0, 8.0, 12.0] {
            let want = j_trapezoid(s);
            let got = j(s);
            assert!((got - want).abs() < 1e-7, "σ={s}: {got} vs {want}");
        }
    }

    #[test]
    fn j_at_two_regression() {
        // Frozen from the trapezoid oracle above.
        let want = 0.485_944_154_133_004_6;
        assert!((j(2.0) - want).abs() < 1e-10, "{}", j(2.0));
    }

    #[test]
    fn j_inverse_cases() {
        assert_eq!(j_inverse(0.0).unwrap(), 0.0);
        assert_eq!(j_inverse(1.0), Err(Error::Saturated));
        assert!(j_inverse(1.2).is_err());
        assert!(j_inverse(-0.1).is_err());
        let i = j(1.5);
        assert!((j_inverse(i).unwrap() - 1.5).abs() < 1e-4);
    }

    #[test]
    fn j_inverse_half_against_oracle_bisection() {
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if j_trapezoid(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let want = 0.5 * (lo + hi);
        assert!((j_inverse(0.5).unwrap() - want).abs() < 1e-6);
    }

    #[test]
    fn capacity_limits() {
        let noisy = biawgn_capacity(ChannelParam::new(1e6).unwrap());
        assert!(noisy.abs() < 1e-3);
        let clean = biawgn_capacity(ChannelParam::new(1e-6).unwrap());
        assert!((clean - 1.0).abs() < 1e-6);
    }

    #[test]
    fn capacity_at_half_rate_limit() {
        // σ_n² = 0.95775 sits at the rate-1/2 Shannon limit; value frozen
        // from the trapezoid oracle with σ_L = 2/σ_n.
        let c = biawgn_capacity(ChannelParam::new(0.95775).unwrap());
        let want = j_trapezoid(2.0 / 0.95775f64.sqrt());
        assert!((c - want).abs() < 1e-7);
        assert!((c - 0.5).abs() < 1e-4);
    }

    #[test]
    fn shannon_roundtrip() {
        for r in [0.5, 8.0 / 14.0, 8.0 / 12.0, 0.8, 8.0 / 9.0] {
            let ch = shannon_noise_for_rate(r).unwrap();
            assert!((biawgn_capacity(ch) - r).abs() < 1e-6);
        }
        let a = shannon_noise_for_rate(0.99).unwrap().noise_variance();
        let b = shannon_noise_for_rate(0.999).unwrap().noise_variance();
        assert!(b < a);
        assert!(shannon_noise_for_rate(1.0).is_err());
    }

    #[test]
    fn ebn0_conventions() {
        let ch = ChannelParam::new(1.0).unwrap();
        assert!(ebn0_db(ch, 0.5).abs() < 1e-12);
        let ch2 = ChannelParam::new(2.0).unwrap();
        assert!((ebn0_db(ch, 0.5) - ebn0_db(ch2, 0.5) - 10.0 * 2f64.log10()).abs() < 1e-12);
        let back = ChannelParam::from_ebn0_db(1.3, 0.6).unwrap();
        assert!((ebn0_db(back, 0.6) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn variable_exit_cases() {
        let chan = ChannelParam::new(0.9).unwrap();
        let l1 = DegreeDistribution::concentrated(1).unwrap();
        for ia in [0.0, 0.3, 0.9] {
            assert_eq!(exit_variable(&l1, ia, chan, true).unwrap(), 0.0);
        }
        let lam = DegreeDistribution::new([(3, 0.4243), (7, 0.5757)]).unwrap();
        let at0 = exit_variable(&lam, 0.0, chan, false).unwrap();
        assert!((at0 - j(2.0 / 0.9f64.sqrt())).abs() < 1e-12);
        // Term-by-term evaluation at I_A = 0.5.
        let s = j_inv(0.5);
        let sc = 4.0 / 0.9;
        let want = 0.4243 * j((2.0 * s * s + sc).sqrt()) + 0.5757 * j((6.0 * s * s + sc).sqrt());
        assert!((exit_variable(&lam, 0.5, chan, false).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn check_exit_cases() {
        let rho = DegreeDistribution::new([(6, 0.339623), (7, 0.660377)]).unwrap();
        assert_eq!(exit_check(&rho, 1.0).unwrap(), 1.0);
        let two = DegreeDistribution::concentrated(2).unwrap();
        for k in 0..100 {
            let ia = k as f64 / 100.0;
            assert!((exit_check(&two, ia).unwrap() - ia).abs() < 1e-9);
        }
        let s = j_inv(0.1);
        let want = 1.0 - 0.339623 * j((5.0f64).sqrt() * s) - 0.660377 * j((6.0f64).sqrt() * s);
        assert!((exit_check(&rho, 0.9).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn distribution_validation() {
        assert!(DegreeDistribution::new([(2, 0.5), (3, 0.4)]).is_err());
        assert!(DegreeDistribution::new([(2, 1.2), (3, -0.2)]).is_err());
        let d = DegreeDistribution::new([(2, 0.5), (4, 0.5)]).unwrap();
        assert!((d.nodes_per_edge() - 0.375).abs() < 1e-15);
        assert_eq!(d.max_degree(), 4);
    }
}
