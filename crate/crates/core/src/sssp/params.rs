//! Per-scale parameter selection.

use crate::decomp::DecompConfig;
use crate::separators::lg;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Random-root decomposition, safe against adaptive adversaries.
    Adaptive,
    /// Oblivious decomposition; supports path reporting.
    Dense,
    /// Oblivious decomposition plus sampled local trees and super-edges.
    Sparse,
    /// Classic ES at every scale.
    Exact,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Adaptive => "adaptive",
            Variant::Dense => "dense",
            Variant::Sparse => "sparse",
            Variant::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Parameters that make the approximation bound hold at any size.
    Conservative,
    /// The asymptotic formulas with the hidden polylog made explicit.
    Paper,
}

/// `⌊lg(x/τ + 1)⌋`.
pub fn eta(x: u64, tau: f64) -> usize {
    eta_base(x, tau, 2.0)
}

/// `⌊log_base(x/τ + 1)⌋`: the largest `j` with `τ·(base^j − 1) ≤ x`.
pub fn eta_base(x: u64, tau: f64, base: f64) -> usize {
    debug_assert!(tau > 0.0 && base > 1.0);
    let x = x as f64;
    let mut j = 0;
    let mut p = base;
    while tau * (p - 1.0) <= x * (1.0 + 1e-12) {
        j += 1;
        p *= base;
    }
    j
}

/// Smallest level `i` with `⌊(1+ε)^i⌋ ≥ x`.
pub fn geometric_level(eps: f64, x: u64) -> usize {
    let mut i = 0;
    while (((1.0 + eps).powi(i as i32)).floor() as u64) < x {
        i += 1;
    }
    i
}

/// `(1+ε)^i ≤ x`, largest such `i`.
fn geometric_floor(eps: f64, x: f64) -> i32 {
    let mut i = 0;
    while (1.0 + eps).powi(i + 1) <= x * (1.0 + 1e-12) {
        i += 1;
    }
    i
}

/// Parameters of one distance scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub requested: Variant,
    /// Variant actually built (sparse may turn into dense).
    pub variant: Variant,
    pub preset: Preset,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    /// The scale `D`: this structure answers distances in `[D, 2D)`.
    pub scale: u64,
    pub c_param: f64,
    pub d1: u64,
    pub d2: u64,
    /// Additive unit of the oblivious variants; the decomposition uses `d/2`.
    pub d: u64,
    pub tau: f64,
    /// Edges heavier than `omega` bypass the decomposition.
    pub omega: u64,
    pub rho: f64,
    pub delta: u64,
    pub d_prime: u64,
    pub sample_c: f64,
    /// The scale runs as classic ES.
    pub fallback: bool,
    pub clamped: Vec<String>,
    /// Fault injection: queries omit the additive slack.
    #[serde(default)]
    pub drop_additive: bool,
}

/// Unrounded formula values of the paper preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub polylog: f64,
    pub d1: f64,
    pub d2: f64,
    pub tau_adaptive: f64,
    pub d: f64,
    pub tau_dense: f64,
    pub dense_crossover: f64,
    pub d_prime: f64,
    pub rho: f64,
    pub d_sparse: f64,
    pub delta: f64,
    pub omega: f64,
}

/// The formulas before rounding and clamping.
pub fn paper_formulas(n: usize, m: usize, eps: f64, scale: u64, c_param: f64) -> RawParams {
    let (nf, mf, df) = (n.max(2) as f64, m.max(1) as f64, scale as f64);
    let polylog = c_param * lg(n.max(2)).powi(2);
    let d1 = nf * df.sqrt() / mf.sqrt();
    let d2 = eps * df / polylog;
    let d = nf.powf(1.5) / (mf.sqrt() * eps.sqrt()) / polylog;
    let d_prime = (df * nf / mf).cbrt();
    let rho = eps.powf(2.0 / 3.0) * df.powf(8.0 / 9.0) * mf.powf(1.0 / 9.0) / nf.powf(7.0 / 9.0);
    let d_sparse = rho.max(1.0).sqrt() * nf.powf(7.0 / 6.0) / (eps * df.cbrt() * mf.powf(1.0 / 6.0));
    RawParams {
        polylog,
        d1,
        d2,
        tau_adaptive: polylog * nf * nf / (eps * df * d1.max(1.0)),
        d,
        tau_dense: polylog * nf * nf / (eps * d.max(1.0) * df),
        dense_crossover: nf.powf(1.5) / (mf.sqrt() * eps.powf(1.5)),
        d_prime,
        rho,
        d_sparse,
        delta: polylog * rho.max(1.0) * d_prime.max(1.0) * nf * nf / (eps * d_sparse.max(1.0) * df),
        omega: mf.powf(0.25) * df.powf(0.75) * eps.sqrt() / nf,
    }
}

fn need_span(n: usize, omega: u64) -> u64 {
    (2.0 * omega as f64 * lg(n.max(1))).ceil() as u64
}

fn round_down(x: u64, unit: u64) -> u64 {
    x / unit * unit
}

impl ParamSet {
    fn blank(variant: Variant, preset: Preset, n: usize, m: usize, eps: f64, scale: u64, c_param: f64) -> Self {
        ParamSet {
            requested: variant,
            variant,
            preset,
            n,
            m,
            epsilon: eps,
            scale,
            c_param,
            d1: 0,
            d2: 0,
            d: 0,
            tau: n as f64 + 1.0,
            omega: 1,
            rho: 1.0,
            delta: n as u64,
            d_prime: 1,
            sample_c: 6.0,
            fallback: false,
            clamped: Vec::new(),
            drop_additive: false,
        }
    }

    fn clamp(&mut self, note: impl Into<String>) {
        self.clamped.push(note.into());
    }

    /// Additive term of the query.
    pub fn additive(&self) -> u64 {
        if self.drop_additive {
            return 0;
        }
        match self.variant {
            Variant::Adaptive => 2 * self.d2,
            Variant::Dense | Variant::Sparse => 2 * self.d,
            Variant::Exact => 0,
        }
    }

    /// The same parameters with the additive slack removed from answers.
    pub fn without_additive(mut self) -> Self {
        self.drop_additive = true;
        self
    }

    /// Distance parameter handed to the oblivious decomposition.
    pub fn decomposition_d(&self) -> u64 {
        round_down(self.d / 2, self.omega)
    }

    pub fn decomposition_config(&self) -> Option<DecompConfig> {
        if self.fallback {
            return None;
        }
        let base = match self.variant {
            Variant::Adaptive => DecompConfig::adaptive(self.d1, self.d2),
            Variant::Dense | Variant::Sparse => DecompConfig::oblivious(self.decomposition_d()),
            Variant::Exact => return None,
        };
        Some(base.hierarchical().weighted(self.omega))
    }

    /// Overrides `τ` (kept at least 1).
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau.max(1.0);
        self
    }

    /// Overrides the sampling constant of the sparse variant.
    pub fn with_sample_c(mut self, c: f64) -> Self {
        self.sample_c = c;
        self
    }

    /// Sampling probability of the sparse variant.
    pub fn sample_probability(&self) -> f64 {
        let p = self.sample_c * (self.n.max(2) as f64).ln() / ((1.0 + self.epsilon) * self.d_prime as f64);
        p.min(1.0)
    }

    /// Level of base edges in the sparse variant.
    pub fn base_level(&self) -> usize {
        geometric_floor(self.epsilon, self.rho).max(0) as usize
    }
}

/// Parameters for an unweighted graph at scale `D`.
pub fn select_parameters(
    variant: Variant,
    preset: Preset,
    n: usize,
    m: usize,
    eps: f64,
    scale: u64,
    c_param: f64,
) -> ParamSet {
    let mut p = ParamSet::blank(variant, preset, n, m, eps, scale, c_param);
    let df = scale as f64;
    match (variant, preset) {
        (Variant::Exact, _) => p.fallback = true,
        (Variant::Adaptive, Preset::Conservative) => {
            p.d2 = (eps * df / 2.0).floor() as u64;
            p.d1 = (p.d2 / 2).min(p.d2.saturating_sub(need_span(n, 1)));
            if p.d1 < 1 {
                p.fallback = true;
                p.clamp("d1 below 1");
            }
        }
        (Variant::Dense, Preset::Conservative) | (Variant::Sparse, Preset::Conservative) => {
            p.d = (eps * df / 2.0).floor() as u64;
            if variant == Variant::Sparse {
                p.d_prime = ((df * n as f64 / m.max(1) as f64).cbrt().round() as u64).max(1);
            }
            if p.d / 2 < 1 {
                p.fallback = true;
                p.clamp("d/2 below 1");
            }
        }
        (Variant::Adaptive, Preset::Paper) => {
            let raw = paper_formulas(n, m, eps, scale, c_param);
            p.d2 = raw.d2.floor() as u64;
            let d1 = raw.d1.round() as u64;
            let cap = (p.d2 / 2).min(p.d2.saturating_sub(need_span(n, 1)));
            p.d1 = d1.min(cap);
            if p.d1 < d1 {
                p.clamp(format!("d1 {d1} clamped to {}", p.d1));
            }
            p.tau = raw.polylog * (n * n) as f64 / (eps * df * p.d1.max(1) as f64);
            if p.tau < 1.0 {
                p.clamp("tau raised to 1");
                p.tau = 1.0;
            }
            let crossover = (n * n) as f64 / (eps * eps * m.max(1) as f64);
            if p.d1 < 1 || df < crossover {
                p.fallback = true;
                p.clamp("below the adaptive crossover");
            }
        }
        (Variant::Dense, Preset::Paper) => paper_dense(&mut p),
        (Variant::Sparse, Preset::Paper) => {
            let raw = paper_formulas(n, m, eps, scale, c_param);
            if raw.d_prime < 1.0 {
                p.variant = Variant::Dense;
                p.clamp("D' below 1, dense substituted");
                paper_dense(&mut p);
                return p;
            }
            p.d_prime = raw.d_prime.round().max(1.0) as u64;
            let rho = raw.rho.clamp(1.0, n.max(1) as f64);
            if rho != raw.rho {
                p.clamp("rho clamped to [1, n]");
            }
            p.rho = (1.0 + eps).powi(geometric_floor(eps, rho));
            let cap = (eps * df / raw.polylog).floor() as u64;
            p.d = (raw.d_sparse.round() as u64).min(cap);
            if (p.d as f64) < raw.d_sparse.round() {
                p.clamp(format!("d clamped to {}", p.d));
            }
            let delta = raw.polylog * p.rho * p.d_prime as f64 * (n * n) as f64 / (eps * p.d.max(1) as f64 * df);
            p.delta = (delta.floor() as u64).min(n as u64);
            if p.delta < delta.floor() as u64 {
                p.clamp("delta clamped to n");
            }
            if p.d / 2 < 1 {
                p.fallback = true;
                p.clamp("d/2 below 1");
            }
        }
    }
    p
}

fn paper_dense(p: &mut ParamSet) {
    let (n, m, eps, df) = (p.n, p.m, p.epsilon, p.scale as f64);
    let raw = paper_formulas(n, m, eps, p.scale, p.c_param);
    let cap = (eps * df / raw.polylog).floor() as u64;
    let d = raw.d.round() as u64;
    p.d = d.min(cap);
    if p.d < d {
        p.clamp(format!("d {d} clamped to {}", p.d));
    }
    p.tau = raw.polylog * (n * n) as f64 / (eps * p.d.max(1) as f64 * df);
    if p.tau < 1.0 {
        p.clamp("tau raised to 1");
        p.tau = 1.0;
    }
    if p.d / 2 < 1 || df < raw.dense_crossover {
        p.fallback = true;
        p.clamp("below the dense crossover");
    }
}

/// Parameters for a weighted graph at scale `D`. The sparse variant has no
/// weighted form and is replaced by the dense one.
pub fn select_weighted(
    variant: Variant,
    preset: Preset,
    n: usize,
    m: usize,
    eps: f64,
    scale: u64,
    c_param: f64,
) -> ParamSet {
    let variant = if variant == Variant::Sparse { Variant::Dense } else { variant };
    let mut p = ParamSet::blank(variant, preset, n, m, eps, scale, c_param);
    if variant != p.requested {
        p.clamp("no weighted sparse variant, dense substituted");
    }
    let df = scale as f64;
    let lgn = need_span(n, 1).max(1);
    match variant {
        Variant::Exact | Variant::Sparse => p.fallback = true,
        Variant::Adaptive => {
            let d2 = match preset {
                Preset::Conservative => (eps * df / 2.0).floor() as u64,
                Preset::Paper => (eps * df / paper_formulas(n, m, eps, scale, c_param).polylog).floor() as u64,
            };
            p.omega = match preset {
                Preset::Conservative => (d2 / (2 * lgn)).max(1),
                Preset::Paper => (paper_formulas(n, m, eps, scale, c_param).omega.round() as u64).max(1),
            };
            p.d2 = round_down(d2, p.omega);
            let span_cap = p.d2.saturating_sub(need_span(n, p.omega));
            let want = match preset {
                Preset::Conservative => p.d2 / 2,
                Preset::Paper => paper_formulas(n, m, eps, scale, c_param).d1.round() as u64,
            };
            p.d1 = round_down(want.min(p.d2 / 2).min(span_cap), p.omega);
            if preset == Preset::Paper {
                let raw = paper_formulas(n, m, eps, scale, c_param);
                p.tau = (raw.polylog * (n * n) as f64 * p.omega as f64 / (eps * p.d1.max(1) as f64 * df)).max(1.0);
            }
            if p.d1 < 1 {
                p.fallback = true;
                p.clamp("d1 below omega");
            }
        }
        Variant::Dense => {
            p.d = match preset {
                Preset::Conservative => (eps * df / 2.0).floor() as u64,
                Preset::Paper => {
                    let raw = paper_formulas(n, m, eps, scale, c_param);
                    (raw.d.round() as u64).min((eps * df / raw.polylog).floor() as u64)
                }
            };
            p.omega = ((p.d / 2) / (2 * lgn)).max(1);
            if preset == Preset::Paper {
                let raw = paper_formulas(n, m, eps, scale, c_param);
                p.tau = (raw.polylog * (n * n) as f64 * p.omega as f64 / (eps * p.d.max(1) as f64 * df)).max(1.0);
            }
            if p.decomposition_d() < 1 {
                p.fallback = true;
                p.clamp("d/2 below omega");
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn eta_examples() {
        assert_eq!(eta(0, 4.0), 0);
        assert_eq!(eta(3, 4.0), 0);
        assert_eq!(eta(4, 4.0), 1);
        assert_eq!(eta(11, 4.0), 1);
        assert_eq!(eta(12, 4.0), 2);
        // Two sets separated by mass 3τ.
        assert_eq!(eta(30, 10.0), 2);
        let n = 100u64;
        let tau = 7.0;
        let k = eta(n, tau);
        assert!(tau * ((1u64 << k) as f64 - 1.0) <= n as f64);
        assert!(tau * ((1u64 << (k + 1)) as f64 - 1.0) > n as f64);
    }

    #[test]
    fn eta_is_monotone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let tau = rng.gen_range(0.5..50.0);
            let base = rng.gen_range(1.05..3.0);
            let mut last = 0;
            for x in 0..400 {
                let j = eta_base(x, tau, base);
                assert!(j >= last);
                last = j;
            }
        }
    }

    #[test]
    fn geometric_level_is_tight() {
        for eps in [0.25, 0.5, 1.0] {
            for x in 1..300u64 {
                let i = geometric_level(eps, x);
                assert!(((1.0 + eps).powi(i as i32)).floor() as u64 >= x);
                if i > 0 {
                    assert!((((1.0 + eps).powi(i as i32 - 1)).floor() as u64) < x);
                }
            }
        }
    }

    #[test]
    fn conservative_choices() {
        let p = select_parameters(Variant::Adaptive, Preset::Conservative, 100, 400, 1.0, 64, 1.0);
        assert_eq!(p.d2, 32);
        assert_eq!(p.d1, 16);
        assert!(!p.fallback);
        assert_eq!(p.additive(), 64);
        let p = select_parameters(Variant::Adaptive, Preset::Conservative, 100, 400, 1.0, 32, 1.0);
        assert_eq!(p.d2, 16);
        assert_eq!(p.d1, 2);
        let p = select_parameters(Variant::Adaptive, Preset::Conservative, 100, 400, 0.25, 64, 1.0);
        assert!(p.fallback);
        let p = select_parameters(Variant::Dense, Preset::Conservative, 100, 400, 0.5, 8, 1.0);
        assert_eq!((p.d, p.decomposition_d()), (2, 1));
        assert!(!p.fallback);
        let p = select_parameters(Variant::Dense, Preset::Conservative, 100, 400, 0.5, 4, 1.0);
        assert!(p.fallback);
        let p = select_parameters(Variant::Sparse, Preset::Conservative, 100, 400, 0.5, 64, 1.0);
        assert_eq!(p.d_prime, 3);
        assert_eq!(p.delta, 100);
        assert_eq!(p.base_level(), 0);
        assert!(select_parameters(Variant::Exact, Preset::Conservative, 10, 10, 1.0, 4, 1.0).fallback);
    }

    #[test]
    fn paper_preset_golden_value() {
        let raw = paper_formulas(10_000, 100_000, 0.5, 1024, 1.0);
        assert_eq!(raw.d1.round() as u64, 1012);
    }

    #[test]
    fn tiny_graphs_fall_back_under_the_paper_preset() {
        for v in [Variant::Adaptive, Variant::Dense, Variant::Sparse] {
            for j in 0..7 {
                let p = select_parameters(v, Preset::Paper, 60, 300, 0.5, 1 << j, 1.0);
                assert!(p.fallback, "{v:?} D={}", 1 << j);
            }
        }
    }

    #[test]
    fn dense_crossover_branch() {
        let (n, m, eps) = (10_000usize, 1_000_000usize, 0.5);
        let cross = paper_formulas(n, m, eps, 1, 1.0).dense_crossover;
        let below = (cross as u64).next_power_of_two() / 2;
        let p = select_parameters(Variant::Dense, Preset::Paper, n, m, eps, below, 1.0);
        assert!(p.fallback);
    }

    #[test]
    fn sparse_substitutes_dense_when_d_prime_vanishes() {
        let p = select_parameters(Variant::Sparse, Preset::Paper, 1000, 200_000, 0.5, 2, 1.0);
        assert_eq!(p.variant, Variant::Dense);
        assert_eq!(p.requested, Variant::Sparse);
    }

    #[test]
    fn weighted_values_divisible_by_omega() {
        for scale in [16u64, 64, 256, 1024] {
            let p = select_weighted(Variant::Adaptive, Preset::Conservative, 50, 200, 0.5, scale, 1.0);
            if !p.fallback {
                assert_eq!(p.d1 % p.omega, 0);
                assert_eq!(p.d2 % p.omega, 0);
                assert!((p.d2 - p.d1) as f64 >= 2.0 * p.omega as f64 * lg(50));
            }
            let p = select_weighted(Variant::Dense, Preset::Conservative, 50, 200, 0.5, scale, 1.0);
            if !p.fallback {
                assert_eq!(p.decomposition_d() % p.omega, 0);
            }
        }
    }
}
