//! Protograph thresholds by reciprocal-channel-approximation density
//! evolution.
//!
//! Every protograph edge type carries one scalar reliability per direction. Variables add reliabilities; checks combine
//! them through the reciprocal map `R`, defined by `C(s) + C(R(s)) = 1` with
//! `C(s) = J(√s)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::infotheory::{dual_reliability, info_from_reliability, reliability, shannon_ebn0_db, ChannelParam};
use crate::protograph::Protograph;
use crate::report::ThresholdRow;
use crate::structure::Rate;

/// Reliabilities are clipped here; `C` is 1 to machine precision far below.
const S_MAX: f64 = 1e4;

/// Reciprocal map of the reliability domain.
#[inline]
pub fn reciprocal(s: f64) -> f64 {
    dual_reliability(info_from_reliability(s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeOptions {
    pub max_iters: usize,
    /// Mutual information every check-to-variable message must reach.
    pub target_mi: f64,
    /// Bisection resolution of the threshold in Eb/N0 dB.
    pub resolution_db: f64,
    /// Upper end of the bisection bracket above the Shannon limit (dB).
    pub bracket_db: f64,
}

impl Default for DeOptions {
    fn default() -> Self {
        DeOptions { max_iters: 10_000, target_mi: 1.0 - 1e-6, resolution_db: 1e-4, bracket_db: 10.0 }
    }
}

/// Per-edge-type state after an evolution. Parallel edges of one
/// protograph entry carry identical messages from the zero start, so one
/// scalar per `(check, var)` pair and direction is kept, in the order of
/// [`Protograph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeState {
    pub to_check: Vec<f64>,
    pub to_var: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Flattened edge types with their multiplicities.
struct EdgeTypes {
    mult: Vec<f64>,
    check_types: Vec<Vec<usize>>,
    var_types: Vec<Vec<usize>>,
}

fn edge_types(g: &Protograph) -> EdgeTypes {
    let mut mult = Vec::new();
    let mut check_types = vec![Vec::new(); g.num_checks()];
    let mut var_types = vec![Vec::new(); g.num_vars()];
    for (c, v, k) in g.edges() {
        check_types[c].push(mult.len());
        var_types[v].push(mult.len());
        mult.push(k as f64);
    }
    EdgeTypes { mult, check_types, var_types }
}

/// Runs DE from zero messages at `chan`. Stops on convergence, on a stall
/// (no message grows any more) or after `max_iters`.
pub fn rca_evolve(g: &Protograph, chan: ChannelParam, opts: &DeOptions) -> DeState {
    rca_evolve_observed(g, chan, opts, None)
}

/// [`rca_evolve`] with an observer called after each iteration.
pub fn rca_evolve_observed(
    g: &Protograph,
    chan: ChannelParam,
    opts: &DeOptions,
    mut observer: Option<&mut dyn FnMut(&DeState)>,
) -> DeState {
    let t = edge_types(g);
    let n = t.mult.len();
    let s_target = reliability(opts.target_mi.min(1.0 - 1e-12));
    let ch: Vec<f64> = (0..g.num_vars()).map(|v| chan.channel_msg_variance(g.is_punctured(v))).collect();
    let mut st = DeState { to_check: vec![0.0; n], to_var: vec![0.0; n], iterations: 0, converged: false };
    let mut recip = vec![0.0; n];
    while st.iterations < opts.max_iters {
        for (v, es) in t.var_types.iter().enumerate() {
            let total: f64 = ch[v] + es.iter().map(|&e| t.mult[e] * st.to_var[e]).sum::<f64>();
            for &e in es {
                st.to_check[e] = (total - st.to_var[e]).min(S_MAX);
            }
        }
        for e in 0..n {
            recip[e] = reciprocal(st.to_check[e]);
        }
        let mut grew = false;
        for es in &t.check_types {
            // A zero-reliability input maps to an infinite term, so the
            // leave-one-out sums count infinities separately.
            let mut finite = 0.0;
            let mut infinite = 0.0;
            for &e in es {
                if recip[e].is_finite() {
                    finite += t.mult[e] * recip[e];
                } else {
                    infinite += t.mult[e];
                }
            }
            for &e in es {
                let others = if recip[e].is_finite() {
                    if infinite > 0.0 {
                        f64::INFINITY
                    } else {
                        (finite - recip[e]).max(0.0)
                    }
                } else if infinite > 1.0 {
                    f64::INFINITY
                } else {
                    finite
                };
                let out = reciprocal(others).min(S_MAX);
                if out > st.to_var[e] * (1.0 + 1e-12) + 1e-12 {
                    grew = true;
                }
                st.to_var[e] = out;
            }
        }
        st.iterations += 1;
        if let Some(obs) = observer.as_mut() {
            obs(&st);
        }
        if st.to_var.iter().all(|&s| s >= s_target) {
            st.converged = true;
            break;
        }
        if !grew {
            break;
        }
    }
    st
}

/// True when DE at `chan` drives every check-to-variable message to the
/// target mutual information.
pub fn rca_converges(g: &Protograph, chan: ChannelParam, opts: &DeOptions) -> bool {
    rca_evolve(g, chan, opts).converged
}

/// Transmitted rate `(n - m) / (n - punctured)` as a reduced fraction.
pub fn protograph_rate(g: &Protograph) -> Result<Rate> {
    let k = (g.num_vars() - g.num_checks()) as u64;
    let n = (g.num_vars() - g.num_punctured()) as u64;
    if k == 0 || n <= k {
        return Err(Error::Invalid(format!("protograph has no rate in (0,1): k = {k}, n = {n}")));
    }
    let d = gcd(k, n);
    Rate::new(k / d, n / d)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Worst channel (bisected in Eb/N0 at the transmitted rate) at which DE
/// converges. `None` when it fails even `opts.bracket_db` above capacity.
pub fn rca_threshold(g: &Protograph, opts: &DeOptions) -> Result<Option<ThresholdRow>> {
    if g.num_punctured() == g.num_vars() {
        return Ok(None);
    }
    let rate = protograph_rate(g)?;
    let r = rate.value();
    let shannon = shannon_ebn0_db(r)?;
    let at = |db: f64| ChannelParam::from_ebn0_db(db, r);
    let (mut lo, mut hi) = (shannon, shannon + opts.bracket_db);
    if !rca_converges(g, at(hi)?, opts) {
        return Ok(None);
    }
    while hi - lo > opts.resolution_db {
        let mid = 0.5 * (lo + hi);
        if rca_converges(g, at(mid)?, opts) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(ThresholdRow::new(rate, at(hi)?)?))
}

/// Thresholds of each `(protograph, puncture mask)` member, in input order.
/// Members are evaluated in parallel.
pub fn family_threshold_report(family: &[(Protograph, Vec<bool>)], opts: &DeOptions) -> Result<Vec<ThresholdRow>> {
    family
        .par_iter()
        .map(|(g, mask)| {
            let p = g.with_punctured(mask.clone())?;
            let rate = protograph_rate(&p)?;
            rca_threshold(&p, opts)?.ok_or_else(|| Error::DesignFailed(format!("no threshold for the rate-{rate} member")))
        })
        .collect()
}
