//! EXIT functions of protograph-structured code components.
//!
//! A [`StructuredComponent`] is the deterministic part of a semi-structured
//! code: a small protograph whose checks additionally carry "left" sockets
//! into the random interleaver. Its EXIT function maps the mutual
//! information on the left sockets (a priori) to the mutual information
//! leaving them (extrinsic). [`structured_exit_point`] computes it by
//! solving the per-edge Gaussian-approximation equations with a fixed-point
//! iteration; [`monte_carlo_exit`] estimates the same quantity by
//! message passing on sampled LLRs.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::infotheory::{
    check_combine, dual_reliability, exit_variable, info_from_reliability, j_inv, reliability, ChannelParam,
    DegreeDistribution,
};
use crate::protograph::{Protograph, VarRole};
use crate::structure::build_h2_base;

/// Termination threshold on the norm of successive check-output vectors.
pub const EPS_THRESH: f64 = 1e-6;
/// Hard sweep cap for the fixed-point solver.
pub const MAX_SWEEPS: usize = 100_000;

const MC_MAX_SWEEPS: usize = 200;
const MC_STABLE: f64 = 1e-4;
const LLR_CLIP: f64 = 50.0;

/// Left-socket count of one check type and the fraction of check copies of
/// that type.
pub type SocketMix = Vec<(u32, f64)>;

#[derive(Debug, Clone)]
pub struct StructuredComponent {
    proto: Protograph,
    left: Vec<SocketMix>,
    chan: ChannelParam,
    /// One entry per protograph edge (multiplicities expanded): `(check, var)`.
    edges: Vec<(usize, usize)>,
    check_edges: Vec<Vec<usize>>,
    var_edges: Vec<Vec<usize>>,
}

impl StructuredComponent {
    /// Every check copy has the same number of left sockets.
    pub fn new(proto: Protograph, left_sockets: Vec<u32>, chan: ChannelParam) -> Result<Self> {
        let mix = left_sockets.into_iter().map(|l| vec![(l, 1.0)]).collect();
        Self::with_mixture(proto, mix, chan)
    }

    /// Per-check mixtures of left-socket counts (weights are fractions of
    /// check copies and must sum to 1 per check).
    pub fn with_mixture(proto: Protograph, left: Vec<SocketMix>, chan: ChannelParam) -> Result<Self> {
        if left.len() != proto.num_checks() {
            return Err(Error::Invalid(format!(
                "{} socket mixtures for {} checks",
                left.len(),
                proto.num_checks()
            )));
        }
        for (c, mix) in left.iter().enumerate() {
            let total: f64 = mix.iter().map(|e| e.1).sum();
            if mix.is_empty() || (total - 1.0).abs() > 1e-9 || mix.iter().any(|e| !(e.1 >= 0.0)) {
                return Err(Error::Invalid(format!("socket mixture of check {c} is not a distribution")));
            }
        }
        let mut edges = Vec::new();
        let mut check_edges = vec![Vec::new(); proto.num_checks()];
        let mut var_edges = vec![Vec::new(); proto.num_vars()];
        for (c, v, k) in proto.edges() {
            for _ in 0..k {
                check_edges[c].push(edges.len());
                var_edges[v].push(edges.len());
                edges.push((c, v));
            }
        }
        let comp = StructuredComponent { proto, left, chan, edges, check_edges, var_edges };
        if comp.left_edge_count() <= 0.0 {
            return Err(Error::Invalid("component has no left sockets".into()));
        }
        Ok(comp)
    }

    /// Left sockets fill every check up to total degree `dc`.
    pub fn with_total_degree(proto: Protograph, dc: u32, chan: ChannelParam) -> Result<Self> {
        let left = (0..proto.num_checks())
            .map(|c| {
                let right = proto.check_degree(c);
                dc.checked_sub(right)
                    .ok_or_else(|| Error::Invalid(format!("check {c} already has degree {right} > {dc}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(proto, left, chan)
    }

    /// Total check degrees drawn from an edge-perspective distribution,
    /// applied to every protograph check in node proportion.
    pub fn with_check_distribution(proto: Protograph, rho: &DegreeDistribution, chan: ChannelParam) -> Result<Self> {
        let nodes = rho.node_fractions();
        let left = (0..proto.num_checks())
            .map(|c| {
                let right = proto.check_degree(c);
                nodes
                    .iter()
                    .map(|&(d, w)| {
                        (d as u32)
                            .checked_sub(right)
                            .map(|l| (l, w))
                            .ok_or_else(|| Error::Invalid(format!("check {c} has right degree {right} > {d}")))
                    })
                    .collect::<Result<SocketMix>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_mixture(proto, left, chan)
    }

    /// E2RC H2 base of size `m` with every check at total degree `dc`.
    pub fn e2rc(m: usize, dc: u32, chan: ChannelParam) -> Result<Self> {
        Self::with_total_degree(build_h2_base(m)?, dc, chan)
    }

    /// Accumulator chain of `m` checks: check `i` joins parity `i` and
    /// parity `i-1`, so the last parity node has degree 1. Every check is
    /// filled to total degree `dc` with left sockets.
    pub fn ira_chain(m: usize, dc: u32, chan: ChannelParam) -> Result<Self> {
        if m == 0 {
            return Err(Error::Invalid("empty accumulator".into()));
        }
        let rows = (0..m)
            .map(|i| {
                let mut r = vec![0u32; m];
                r[i] = 1;
                if i > 0 {
                    r[i - 1] = 1;
                }
                r
            })
            .collect();
        let proto = Protograph::unpunctured(rows, vec![VarRole::ParityNew; m])?;
        Self::with_total_degree(proto, dc, chan)
    }

    pub fn with_channel(&self, chan: ChannelParam) -> Self {
        StructuredComponent { chan, ..self.clone() }
    }

    pub fn with_punctured(&self, mask: Vec<bool>) -> Result<Self> {
        Ok(StructuredComponent { proto: self.proto.with_punctured(mask)?, ..self.clone() })
    }

    pub fn proto(&self) -> &Protograph {
        &self.proto
    }

    pub fn channel(&self) -> ChannelParam {
        self.chan
    }

    pub fn left_mixtures(&self) -> &[SocketMix] {
        &self.left
    }

    /// `|E_R|`, right edges with multiplicities.
    pub fn right_edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Expected `|E_L|` per copy of the base graph.
    pub fn left_edge_count(&self) -> f64 {
        self.left.iter().flat_map(|m| m.iter()).map(|&(l, w)| l as f64 * w).sum()
    }

    fn channel_reliability(&self, v: usize) -> f64 {
        self.chan.channel_msg_variance(self.proto.is_punctured(v))
    }
}

/// Mutual information carried by every right edge, in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeState {
    /// Variable-to-check (a priori at the checks).
    pub to_check: Vec<f64>,
    /// Check-to-variable.
    pub to_var: Vec<f64>,
}

impl EdgeState {
    pub fn zeros(comp: &StructuredComponent) -> Self {
        let n = comp.right_edge_count();
        EdgeState { to_check: vec![0.0; n], to_var: vec![0.0; n] }
    }
}

#[inline]
fn scaled(n: u32, s: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * s
    }
}

/// Result of one fixed-point solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSolution {
    pub i_e: f64,
    pub sweeps: usize,
}

/// Solves the edge equations from `state` (updated in place). `observer`
/// sees the state after every variable update.
pub fn solve_from(
    comp: &StructuredComponent,
    i_a_in: f64,
    state: &mut EdgeState,
    observer: Option<&mut dyn FnMut(&EdgeState)>,
) -> Result<PointSolution> {
    solve_with_tolerance(comp, i_a_in, state, EPS_THRESH, observer)
}

/// [`solve_from`] with an explicit termination threshold.
pub fn solve_with_tolerance(
    comp: &StructuredComponent,
    i_a_in: f64,
    state: &mut EdgeState,
    eps: f64,
    mut observer: Option<&mut dyn FnMut(&EdgeState)>,
) -> Result<PointSolution> {
    if !(0.0..=1.0).contains(&i_a_in) {
        return Err(Error::Domain(format!("I_A must lie in [0,1], got {i_a_in}")));
    }
    let s_in = dual_reliability(i_a_in);
    let n = comp.right_edge_count();
    let mut dual = vec![0.0; n];
    let mut rel = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut sweeps = 0;
    loop {
        for e in 0..n {
            dual[e] = dual_reliability(state.to_check[e]);
        }
        // Check-to-right update.
        for (c, es) in comp.check_edges.iter().enumerate() {
            for &e in es {
                let others: f64 = es.iter().filter(|&&f| f != e).map(|&f| dual[f]).sum();
                next[e] = comp.left[c].iter().map(|&(l, w)| w * check_combine(scaled(l, s_in) + others)).sum();
            }
        }
        let norm = next.iter().zip(&state.to_var).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        std::mem::swap(&mut state.to_var, &mut next);
        if sweeps > 0 && norm < eps {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: sweeps, residual: norm });
        }
        // Variable update.
        for e in 0..n {
            rel[e] = reliability(state.to_var[e]);
        }
        for (v, es) in comp.var_edges.iter().enumerate() {
            let ch = comp.channel_reliability(v);
            for &e in es {
                let others: f64 = es.iter().filter(|&&f| f != e).map(|&f| rel[f]).sum();
                state.to_check[e] = info_from_reliability(ch + others);
            }
        }
        sweeps += 1;
        if let Some(obs) = observer.as_mut() {
            obs(state);
        }
    }
    // Check-to-left outputs, averaged over left edges.
    let mut acc = 0.0;
    for (c, es) in comp.check_edges.iter().enumerate() {
        let right: f64 = es.iter().map(|&e| dual[e]).sum();
        for &(l, w) in &comp.left[c] {
            if l > 0 {
                acc += w * l as f64 * check_combine(scaled(l - 1, s_in) + right);
            }
        }
    }
    Ok(PointSolution { i_e: acc / comp.left_edge_count(), sweeps })
}

/// One point of the structured EXIT function, solved from zero initial state.
pub fn structured_exit_point(comp: &StructuredComponent, i_a_in: f64) -> Result<f64> {
    let mut state = EdgeState::zeros(comp);
    Ok(solve_from(comp, i_a_in, &mut state, None)?.i_e)
}

/// A sampled EXIT function on a uniform grid over `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitCurve {
    points: Vec<(f64, f64)>,
}

impl ExitCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid("an EXIT curve needs at least two points".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Invalid("abscissae must be strictly increasing".into()));
            }
        }
        if points.iter().any(|&(a, b)| !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b)) {
            return Err(Error::Invalid("EXIT values must lie in [0,1]".into()));
        }
        Ok(ExitCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 >= w[0].1)
    }

    /// Linear interpolation, clamped to the end values outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.points;
        if x <= p[0].0 {
            return p[0].1;
        }
        if x >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let k = p.partition_point(|q| q.0 <= x) - 1;
        let (x0, y0) = p[k];
        let (x1, y1) = p[k + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Largest pointwise difference against `other` evaluated at this curve's abscissae.
    pub fn max_abs_diff(&self, other: &ExitCurve) -> f64 {
        self.points.iter().map(|&(x, y)| (y - other.eval(x)).abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("i_a,i_e\n");
        for &(a, e) in &self.points {
            let _ = writeln!(s, "{a:.16e},{e:.16e}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "i_a,i_e" => {}
            _ => return Err(Error::Parse { line: 1, msg: "expected header `i_a,i_e`".into() }),
        }
        let mut pts = Vec::new();
        for (i, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            let bad = |m: String| Error::Parse { line: i + 1, msg: m };
            let (a, b) = l.split_once(',').ok_or_else(|| bad("expected two columns".into()))?;
            let a: f64 = a.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let b: f64 = b.trim().parse().map_err(|e| bad(format!("{e}")))?;
            pts.push((a, b));
        }
        ExitCurve::new(pts)
    }
}

/// `num_points` abscissae `k / num_points`.
pub fn uniform_grid(num_points: usize) -> Vec<f64> {
    (0..num_points).map(|k| k as f64 / num_points as f64).collect()
}

/// Grid points per warm-started run in [`structured_exit_curve`].
pub const WARM_CHUNK: usize = 250;

/// Curve of [`structured_exit_point`] over a uniform grid. The grid is cut
/// into fixed chunks of [`WARM_CHUNK`] points; each chunk starts from zero and
/// every later point reuses the converged state of its predecessor. Chunks
/// run in parallel, and the result does not depend on the thread count.
pub fn structured_exit_curve(comp: &StructuredComponent, num_points: usize) -> Result<ExitCurve> {
    structured_exit_curve_with(comp, num_points, EPS_THRESH, WARM_CHUNK)
}

/// Every point solved from zero initial state.
pub fn structured_exit_curve_cold(comp: &StructuredComponent, num_points: usize) -> Result<ExitCurve> {
    structured_exit_curve_with(comp, num_points, EPS_THRESH, 1)
}

/// One sequential warm-started pass over the whole grid.
pub fn structured_exit_curve_warm(comp: &StructuredComponent, num_points: usize) -> Result<ExitCurve> {
    structured_exit_curve_with(comp, num_points, EPS_THRESH, num_points.max(1))
}

/// General form: termination threshold `eps`, warm-start runs of `chunk`
/// points (`chunk = 1` is a cold start everywhere).
pub fn structured_exit_curve_with(
    comp: &StructuredComponent,
    num_points: usize,
    eps: f64,
    chunk: usize,
) -> Result<ExitCurve> {
    if num_points < 2 {
        return Err(Error::Invalid("num_points must be at least 2".into()));
    }
    if chunk == 0 {
        return Err(Error::Invalid("chunk must be positive".into()));
    }
    let grid = uniform_grid(num_points);
    let parts: Vec<Vec<(f64, f64)>> = grid
        .par_chunks(chunk)
        .map(|xs| {
            let mut state = EdgeState::zeros(comp);
            xs.iter()
                .map(|&x| Ok((x, solve_with_tolerance(comp, x, &mut state, eps, None)?.i_e)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    ExitCurve::new(parts.into_iter().flatten().collect())
}

/// Curve of the unstructured variable nodes on a uniform grid.
pub fn unstructured_exit_curve(lambda: &DegreeDistribution, chan: ChannelParam, num_points: usize) -> Result<ExitCurve> {
    unstructured_exit_curve_punctured(lambda, chan, false, num_points)
}

pub fn unstructured_exit_curve_punctured(
    lambda: &DegreeDistribution,
    chan: ChannelParam,
    punctured: bool,
    num_points: usize,
) -> Result<ExitCurve> {
    if num_points < 2 {
        return Err(Error::Invalid("num_points must be at least 2".into()));
    }
    let pts = uniform_grid(num_points)
        .into_iter()
        .map(|x| Ok((x, exit_variable(lambda, x, chan, punctured)?)))
        .collect::<Result<Vec<_>>>()?;
    ExitCurve::new(pts)
}

#[inline]
fn boxplus_tanh(l: f64) -> f64 {
    (0.5 * l.clamp(-LLR_CLIP, LLR_CLIP)).tanh()
}

#[inline]
fn atanh_llr(p: f64) -> f64 {
    let p = p.clamp(-1.0 + 1e-16, 1.0 - 1e-16);
    (2.0 * p.atanh()).clamp(-LLR_CLIP, LLR_CLIP)
}

/// Consistent-Gaussian LLR sample of standard deviation `sigma` for bit +1.
#[inline]
fn consistent_llr<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    if sigma.is_infinite() {
        return LLR_CLIP;
    }
    let z: f64 = rng.sample(StandardNormal);
    0.5 * sigma * sigma + sigma * z
}

/// Monte-Carlo sum of `log2(1 + e^{-L})` over extrinsic left-socket outputs
/// of sampled copies of the component, using `samples` a priori inputs.
fn mc_chunk(comp: &StructuredComponent, i_a_in: f64, samples: usize, seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma_a = j_inv(i_a_in);
    let noise_sd = comp.chan.noise_variance().sqrt();
    let n = comp.right_edge_count();
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut ch = vec![0.0; comp.proto.num_vars()];
    let mut to_check = vec![0.0; n];
    let mut to_var = vec![0.0; n];
    let mut prior: Vec<Vec<f64>> = vec![Vec::new(); comp.proto.num_checks()];
    while count < samples {
        for (v, slot) in ch.iter_mut().enumerate() {
            *slot = if comp.proto.is_punctured(v) {
                0.0
            } else {
                let z: f64 = rng.sample(StandardNormal);
                2.0 * (1.0 + noise_sd * z) / comp.chan.noise_variance()
            };
        }
        for (c, slot) in prior.iter_mut().enumerate() {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut l = comp.left[c].last().map(|e| e.0).unwrap_or(0);
            for &(sockets, w) in &comp.left[c] {
                acc += w;
                if u < acc {
                    l = sockets;
                    break;
                }
            }
            slot.clear();
            for _ in 0..l {
                slot.push(consistent_llr(&mut rng, sigma_a));
            }
        }
        to_var.iter_mut().for_each(|x| *x = 0.0);
        for (v, es) in comp.var_edges.iter().enumerate() {
            for &e in es {
                to_check[e] = ch[v];
            }
        }
        for _ in 0..MC_MAX_SWEEPS {
            let mut change: f64 = 0.0;
            for (c, es) in comp.check_edges.iter().enumerate() {
                let left_prod: f64 = prior[c].iter().map(|&l| boxplus_tanh(l)).product();
                for &e in es {
                    let p = es.iter().filter(|&&f| f != e).map(|&f| boxplus_tanh(to_check[f])).product::<f64>();
                    let out = atanh_llr(p * left_prod);
                    change = change.max((out - to_var[e]).abs());
                    to_var[e] = out;
                }
            }
            for (v, es) in comp.var_edges.iter().enumerate() {
                let total: f64 = ch[v] + es.iter().map(|&e| to_var[e]).sum::<f64>();
                for &e in es {
                    to_check[e] = total - to_var[e];
                }
            }
            if change < MC_STABLE {
                break;
            }
        }
        for (c, es) in comp.check_edges.iter().enumerate() {
            let right: f64 = es.iter().map(|&e| boxplus_tanh(to_check[e])).product();
            let t: Vec<f64> = prior[c].iter().map(|&l| boxplus_tanh(l)).collect();
            for j in 0..t.len() {
                if count >= samples {
                    break;
                }
                let others: f64 = t.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &x)| x).product();
                let out = atanh_llr(right * others);
                sum += crate::infotheory::log2_one_plus_exp_neg(out);
                count += 1;
            }
        }
    }
    (sum, count)
}

const MC_CHUNK: usize = 8192;

/// Monte-Carlo estimate of the structured EXIT function at `i_a_in` from
/// `num_samples` a priori inputs. Work is split into fixed chunks with
/// derived seeds, so the result depends only on `seed`, not on threading.
pub fn monte_carlo_exit(comp: &StructuredComponent, i_a_in: f64, num_samples: usize, seed: u64) -> Result<f64> {
    if num_samples == 0 {
        return Err(Error::Invalid("num_samples must be positive".into()));
    }
    if !(0.0..=1.0).contains(&i_a_in) {
        return Err(Error::Domain(format!("I_A must lie in [0,1], got {i_a_in}")));
    }
    let chunks = num_samples.div_ceil(MC_CHUNK);
    let parts: Vec<(f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let take = MC_CHUNK.min(num_samples - k * MC_CHUNK);
            let s = seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            mc_chunk(comp, i_a_in, take, s)
        })
        .collect();
    let (sum, count) = parts.iter().fold((0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((1.0 - sum / count as f64).clamp(0.0, 1.0))
}

/// Monte-Carlo curve on an arbitrary set of abscissae.
pub fn monte_carlo_curve(comp: &StructuredComponent, grid: &[f64], num_samples: usize, seed: u64) -> Result<ExitCurve> {
    let pts = grid
        .iter()
        .enumerate()
        .map(|(k, &x)| Ok((x, monte_carlo_exit(comp, x, num_samples, seed.wrapping_add(k as u64))?)))
        .collect::<Result<Vec<_>>>()?;
    ExitCurve::new(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::j;

    fn chan(s2: f64) -> ChannelParam {
        ChannelParam::new(s2).unwrap()
    }

    #[test]
    fn single_edge_component() {
        let g = Protograph::unpunctured(vec![vec![1]], vec![VarRole::ParityNew]).unwrap();
        let comp = StructuredComponent::new(g, vec![1], chan(0.8)).unwrap();
        let got = structured_exit_point(&comp, 0.0).unwrap();
        let want = j((4.0f64 / 0.8).sqrt());
        assert!((got - want).abs() < 1e-9, "{got} {want}");
    }

    #[test]
    fn perfect_prior_saturates_without_degree_one_nodes() {
        let g = Protograph::unpunctured(vec![vec![1, 1], vec![1, 1]], vec![VarRole::ParityNew; 2]).unwrap();
        let comp = StructuredComponent::new(g, vec![3, 3], chan(0.95775)).unwrap();
        let top = structured_exit_point(&comp, 1.0).unwrap();
        assert!(top > 1.0 - 1e-6, "{top}");
    }

    #[test]
    fn degree_one_root_caps_the_top() {
        // the root parity only ever forwards its channel message, so no
        // left output can become perfect
        let comp = StructuredComponent::e2rc(8, 8, chan(0.95775)).unwrap();
        let top = structured_exit_point(&comp, 1.0).unwrap();
        assert!(top < 0.9 && top > 0.7, "{top}");
        let big = StructuredComponent::e2rc(128, 8, chan(0.95775)).unwrap();
        assert!(structured_exit_point(&big, 1.0).unwrap() > top);
    }

    #[test]
    fn monotone_in_channel_and_prior() {
        let good = StructuredComponent::e2rc(8, 8, chan(0.7)).unwrap();
        let bad = good.with_channel(chan(1.3));
        let a = structured_exit_curve(&good, 40).unwrap();
        let b = structured_exit_curve(&bad, 40).unwrap();
        assert!(a.is_nondecreasing() && b.is_nondecreasing());
        for (p, q) in a.points().iter().zip(b.points()) {
            assert!(p.1 >= q.1 - 1e-12);
        }
    }

    #[test]
    fn iterates_never_decrease() {
        let comp = StructuredComponent::e2rc(16, 7, chan(1.0)).unwrap();
        let mut prev = EdgeState::zeros(&comp);
        let mut ok = true;
        let mut obs = |s: &EdgeState| {
            for (a, b) in s.to_check.iter().zip(&prev.to_check) {
                ok &= *a >= *b - 1e-12;
            }
            for (a, b) in s.to_var.iter().zip(&prev.to_var) {
                ok &= *a >= *b - 1e-12;
            }
            prev = s.clone();
        };
        let mut state = EdgeState::zeros(&comp);
        solve_from(&comp, 0.4, &mut state, Some(&mut obs)).unwrap();
        assert!(ok);
    }

    #[test]
    fn mixture_weights_average_outputs() {
        let g = build_h2_base(4).unwrap();
        let rho = DegreeDistribution::new([(6, 18.0 / 53.0), (7, 35.0 / 53.0)]).unwrap();
        let comp = StructuredComponent::with_check_distribution(g.clone(), &rho, chan(1.0)).unwrap();
        let mix = &comp.left_mixtures()[0];
        assert!((mix[0].1 - 0.375).abs() < 1e-12);
        let y = structured_exit_point(&comp, 0.5).unwrap();
        let lo = structured_exit_point(&StructuredComponent::with_total_degree(g.clone(), 6, chan(1.0)).unwrap(), 0.5).unwrap();
        let hi = structured_exit_point(&StructuredComponent::with_total_degree(g, 7, chan(1.0)).unwrap(), 0.5).unwrap();
        assert!(y > lo.min(hi) - 1e-9 && y < lo.max(hi) + 1e-9);
    }

    #[test]
    fn warm_and_cold_starts_agree() {
        let comp = StructuredComponent::e2rc(32, 8, chan(0.95775)).unwrap();
        let cold = structured_exit_curve_with(&comp, 400, 1e-10, 1).unwrap();
        let warm = structured_exit_curve_with(&comp, 400, 1e-10, 400).unwrap();
        assert!(cold.max_abs_diff(&warm) < 1e-8);
        let chunked = structured_exit_curve(&comp, 400).unwrap();
        assert!(cold.max_abs_diff(&chunked) < 1e-6);
    }

    #[test]
    fn csv_roundtrip() {
        let c = ExitCurve::new(vec![(0.0, 0.1), (0.5, 0.123456789012345678), (0.75, 0.9)]).unwrap();
        let back = ExitCurve::from_csv(&c.to_csv()).unwrap();
        assert_eq!(back, c);
        assert!(ExitCurve::new(vec![(0.0, 0.0)]).is_err());
        assert!(ExitCurve::new(vec![(0.5, 0.0), (0.5, 0.1)]).is_err());
    }

    #[test]
    fn mc_is_seed_deterministic_and_saturates() {
        let comp = StructuredComponent::e2rc(8, 8, chan(0.95775)).unwrap();
        let a = monte_carlo_exit(&comp, 0.4, 20_000, 7).unwrap();
        let b = monte_carlo_exit(&comp, 0.4, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let one = monte_carlo_exit(&comp, 1.0, 20_000, 1).unwrap();
        let ga = structured_exit_point(&comp, 1.0).unwrap();
        assert!((one - ga).abs() < 0.03, "{one} {ga}");
    }

    #[test]
    fn unstructured_curve_is_linear_in_lambda() {
        let ch = chan(0.9);
        let l1 = DegreeDistribution::new([(3, 1.0)]).unwrap();
        let l2 = DegreeDistribution::new([(8, 1.0)]).unwrap();
        let mix = DegreeDistribution::new([(3, 0.3), (8, 0.7)]).unwrap();
        let (a, b, c) = (
            unstructured_exit_curve(&l1, ch, 50).unwrap(),
            unstructured_exit_curve(&l2, ch, 50).unwrap(),
            unstructured_exit_curve(&mix, ch, 50).unwrap(),
        );
        for k in 0..50 {
            let want = 0.3 * a.points()[k].1 + 0.7 * b.points()[k].1;
            assert!((c.points()[k].1 - want).abs() < 1e-12);
        }
        let flat = unstructured_exit_curve_punctured(&DegreeDistribution::concentrated(1).unwrap(), ch, true, 10).unwrap();
        assert!(flat.points().iter().all(|p| p.1 == 0.0));
    }
}
