//! Truncated stick-breaking Dirichlet process mixture model, fitted by
//! mean-field variational inference.
//!
//! Clusters are Gaussian with diagonal covariance; each dimension carries a
//! conjugate Normal-Gamma prior, so every coordinate update increases the
//! evidence lower bound and convergence can be tested on the ELBO delta.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::scalar::Scalar;

/// Fit configuration. `truncation` is the stick-breaking truncation level,
/// `alpha` the DP concentration.
#[derive(Clone, Debug)]
pub struct DpmmConfig<T> {
    pub alpha: T,
    pub truncation: usize,
    pub max_iters: usize,
    pub tol: T,
    /// Clusters with fewer assigned points than this are discarded.
    pub min_members: usize,
    /// Variance floor applied to reported cluster variances.
    pub var_floor: T,
}

impl<T: Scalar> Default for DpmmConfig<T> {
    fn default() -> Self {
        DpmmConfig {
            alpha: T::one(),
            truncation: 20,
            max_iters: 200,
            tol: T::c(1e-6),
            min_members: 2,
            var_floor: T::c(1e-4),
        }
    }
}

/// One retained cluster.
#[derive(Clone, Debug)]
pub struct DpmmCluster<T> {
    pub weight: T,
    pub mean: Vec<T>,
    pub var: Vec<T>,
    pub members: Vec<usize>,
}

/// Fit result: retained clusters and the per-point assignment (index into
/// `clusters`, or `None` when the point's cluster fell below `min_members`).
#[derive(Clone, Debug)]
pub struct DpmmResult<T> {
    pub clusters: Vec<DpmmCluster<T>>,
    pub assignments: Vec<Option<usize>>,
    pub elbo_trace: Vec<T>,
}

struct NormalGamma<T> {
    mu: T,
    kappa: T,
    a: T,
    b: T,
}

/// Fit a DPMM to `points` (each of equal dimension `d >= 1`). Deterministic
/// for a fixed `seed`.
pub fn dpmm_fit<T: Scalar>(points: &[Vec<T>], config: &DpmmConfig<T>, seed: u64) -> DpmmResult<T> {
    assert!(!points.is_empty(), "dpmm_fit requires at least one point");
    let d = points[0].len();
    assert!(d >= 1 && points.iter().all(|p| p.len() == d));
    let n = points.len();
    let t_max = config.truncation.max(2);

    // Prior: broad Normal-Gamma centered on the data.
    let mut prior_mu = vec![T::zero(); d];
    let mut prior_var = vec![T::zero(); d];
    for p in points {
        for (k, &v) in p.iter().enumerate() {
            prior_mu[k] += v;
        }
    }
    let nf = T::c(n as f64);
    for m in prior_mu.iter_mut() {
        *m /= nf;
    }
    for p in points {
        for (k, &v) in p.iter().enumerate() {
            let dv = v - prior_mu[k];
            prior_var[k] += dv * dv;
        }
    }
    for v in prior_var.iter_mut() {
        *v = (*v / nf).max(T::c(1e-6));
    }
    let kappa0 = T::c(1e-2);
    let a0 = T::one();
    let prior: Vec<NormalGamma<T>> = (0..d)
        .map(|k| NormalGamma {
            mu: prior_mu[k],
            kappa: kappa0,
            a: a0,
            // E[lambda] = a0/b0 = 1/prior_var.
            b: a0 * prior_var[k],
        })
        .collect();

    // Random hard init of responsibilities.
    let mut rng = StdRng::seed_from_u64(seed);
    let mut resp = vec![vec![T::zero(); t_max]; n];
    for r in resp.iter_mut() {
        r[rng.random_range(0..t_max)] = T::one();
    }

    let mut gamma1 = vec![T::one(); t_max];
    let mut gamma2 = vec![config.alpha; t_max];
    let mut posts: Vec<Vec<NormalGamma<T>>> = Vec::new();
    let mut elbo_trace = Vec::new();
    let mut prev_elbo = T::neg_infinity();

    for _ in 0..config.max_iters {
        // M-like step: stick-breaking Betas and Normal-Gamma posteriors.
        let counts: Vec<T> = (0..t_max)
            .map(|t| resp.iter().map(|r| r[t]).sum())
            .collect();
        for t in 0..t_max {
            gamma1[t] = T::one() + counts[t];
            let tail: T = counts[t + 1..].iter().copied().sum();
            gamma2[t] = config.alpha + tail;
        }
        posts = (0..t_max)
            .map(|t| {
                (0..d)
                    .map(|k| {
                        let nk = counts[t];
                        let sum: T = points
                            .iter()
                            .zip(resp.iter())
                            .map(|(p, r)| r[t] * p[k])
                            .sum();
                        let mean = if nk > T::c(1e-12) { sum / nk } else { prior[k].mu };
                        let ss: T = points
                            .iter()
                            .zip(resp.iter())
                            .map(|(p, r)| {
                                let dv = p[k] - mean;
                                r[t] * dv * dv
                            })
                            .sum();
                        let kappa = prior[k].kappa + nk;
                        let mu = (prior[k].kappa * prior[k].mu + nk * mean) / kappa;
                        let a = prior[k].a + nk * T::c(0.5);
                        let dm = mean - prior[k].mu;
                        let b = prior[k].b
                            + T::c(0.5) * ss
                            + T::c(0.5) * prior[k].kappa * nk * dm * dm / kappa;
                        NormalGamma { mu, kappa, a, b }
                    })
                    .collect()
            })
            .collect();

        // E step: responsibilities from expected log weights + likelihoods.
        let elog_v: Vec<T> = (0..t_max)
            .map(|t| digamma(gamma1[t]) - digamma(gamma1[t] + gamma2[t]))
            .collect();
        let elog_1mv: Vec<T> = (0..t_max)
            .map(|t| digamma(gamma2[t]) - digamma(gamma1[t] + gamma2[t]))
            .collect();
        let mut elog_pi = vec![T::zero(); t_max];
        let mut acc = T::zero();
        for t in 0..t_max {
            elog_pi[t] = elog_v[t] + acc;
            acc += elog_1mv[t];
        }
        let ln2pi = T::c((2.0 * std::f64::consts::PI).ln());
        for (p, r) in points.iter().zip(resp.iter_mut()) {
            let mut logits = vec![T::zero(); t_max];
            for t in 0..t_max {
                let mut ll = T::zero();
                for k in 0..d {
                    let ng = &posts[t][k];
                    let elog_lambda = digamma(ng.a) - ng.b.ln();
                    let dv = p[k] - ng.mu;
                    let e_quad = ng.a / ng.b * dv * dv + T::one() / ng.kappa;
                    ll += T::c(0.5) * (elog_lambda - ln2pi) - T::c(0.5) * e_quad;
                }
                logits[t] = elog_pi[t] + ll;
            }
            softmax_in_place(&mut logits);
            r.copy_from_slice(&logits);
        }

        let elbo = elbo_value(points, &resp, &gamma1, &gamma2, &posts, &prior, config.alpha);
        elbo_trace.push(elbo);
        if (elbo - prev_elbo).abs() < config.tol && prev_elbo.is_finite() {
            break;
        }
        prev_elbo = elbo;
    }

    // Hard assignments and cluster extraction.
    let hard: Vec<usize> = resp
        .iter()
        .map(|r| {
            let mut best = 0;
            for t in 1..t_max {
                if r[t] > r[best] {
                    best = t;
                }
            }
            best
        })
        .collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); t_max];
    for (i, &t) in hard.iter().enumerate() {
        members[t].push(i);
    }
    let _ = &posts;

    let empirical = |ms: &[usize]| -> (Vec<T>, Vec<T>) {
        let nk = T::c(ms.len() as f64);
        let mut mean = vec![T::zero(); d];
        for &i in ms {
            for k in 0..d {
                mean[k] += points[i][k] / nk;
            }
        }
        let mut var = vec![T::zero(); d];
        for &i in ms {
            for k in 0..d {
                let dv = points[i][k] - mean[k];
                var[k] += dv * dv / nk;
            }
        }
        for v in var.iter_mut() {
            *v = v.max(config.var_floor);
        }
        (mean, var)
    };

    let mut clusters: Vec<DpmmCluster<T>> = members
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|m| {
            let (mean, var) = empirical(&m);
            DpmmCluster {
                weight: T::c(m.len() as f64) / T::c(n as f64),
                mean,
                var,
                members: m,
            }
        })
        .collect();

    // Mean-field VI can leave one blob split across near-identical
    // components; merge clusters whose means are indistinguishable at the
    // 3-sigma scale, then refit the merged statistics.
    'merge: loop {
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let close = (0..d).all(|k| {
                    let s = (clusters[i].var[k] + clusters[j].var[k]).sqrt();
                    (clusters[i].mean[k] - clusters[j].mean[k]).abs() <= T::c(3.0) * s
                });
                if close {
                    let absorbed = clusters.remove(j);
                    clusters[i].members.extend(absorbed.members);
                    clusters[i].members.sort_unstable();
                    let (mean, var) = empirical(&clusters[i].members);
                    clusters[i].mean = mean;
                    clusters[i].var = var;
                    clusters[i].weight += absorbed.weight;
                    continue 'merge;
                }
            }
        }
        break;
    }

    clusters.retain(|c| c.members.len() >= config.min_members);
    clusters.sort_by(|a, b| b.members.len().cmp(&a.members.len()));
    let mut assignments = vec![None; n];
    for (ci, c) in clusters.iter().enumerate() {
        for &i in &c.members {
            assignments[i] = Some(ci);
        }
    }

    DpmmResult {
        clusters,
        assignments,
        elbo_trace,
    }
}

fn softmax_in_place<T: Scalar>(logits: &mut [T]) {
    let mut mx = logits[0];
    for &v in logits.iter() {
        mx = mx.max(v);
    }
    let mut sum = T::zero();
    for v in logits.iter_mut() {
        *v = (*v - mx).exp();
        sum += *v;
    }
    for v in logits.iter_mut() {
        *v /= sum;
    }
}

#[allow(clippy::too_many_arguments)]
fn elbo_value<T: Scalar>(
    points: &[Vec<T>],
    resp: &[Vec<T>],
    gamma1: &[T],
    gamma2: &[T],
    posts: &[Vec<NormalGamma<T>>],
    prior: &[NormalGamma<T>],
    alpha: T,
) -> T {
    let t_max = gamma1.len();
    let d = prior.len();
    let ln2pi = T::c((2.0 * std::f64::consts::PI).ln());
    let half = T::c(0.5);
    let mut elbo = T::zero();

    let elog_v: Vec<T> = (0..t_max)
        .map(|t| digamma(gamma1[t]) - digamma(gamma1[t] + gamma2[t]))
        .collect();
    let elog_1mv: Vec<T> = (0..t_max)
        .map(|t| digamma(gamma2[t]) - digamma(gamma1[t] + gamma2[t]))
        .collect();
    let mut elog_pi = vec![T::zero(); t_max];
    let mut acc = T::zero();
    for t in 0..t_max {
        elog_pi[t] = elog_v[t] + acc;
        acc += elog_1mv[t];
    }

    // E[log p(x | z, eta)] + E[log p(z | V)] - E[log q(z)].
    for (p, r) in points.iter().zip(resp.iter()) {
        for t in 0..t_max {
            if r[t] <= T::c(1e-300) {
                continue;
            }
            let mut ll = T::zero();
            for k in 0..d {
                let ng = &posts[t][k];
                let elog_lambda = digamma(ng.a) - ng.b.ln();
                let dv = p[k] - ng.mu;
                let e_quad = ng.a / ng.b * dv * dv + T::one() / ng.kappa;
                ll += half * (elog_lambda - ln2pi) - half * e_quad;
            }
            elbo += r[t] * (ll + elog_pi[t] - r[t].ln());
        }
    }

    // E[log p(V | alpha)] - E[log q(V)].
    for t in 0..t_max {
        elbo += alpha.ln() + (alpha - T::one()) * elog_1mv[t];
        elbo -= beta_neg_entropy(gamma1[t], gamma2[t]);
    }

    // E[log p(eta)] - E[log q(eta)] per dimension, Normal-Gamma.
    for post_t in posts {
        for (ng, pr) in post_t.iter().zip(prior.iter()) {
            let elog_lambda = digamma(ng.a) - ng.b.ln();
            let e_lambda = ng.a / ng.b;
            let dm = ng.mu - pr.mu;
            // E[log p(mu, lambda)] under q.
            let e_log_p = half * (pr.kappa.ln() - ln2pi)
                + half * elog_lambda
                - half * pr.kappa * (e_lambda * dm * dm + T::one() / ng.kappa)
                + pr.a * pr.b.ln()
                - ln_gamma(pr.a)
                + (pr.a - T::one()) * elog_lambda
                - pr.b * e_lambda;
            // -E[log q(mu, lambda)] (Normal-Gamma entropy).
            let e_log_q = half * (ng.kappa.ln() - ln2pi) + half * elog_lambda - half
                + ng.a * ng.b.ln()
                - ln_gamma(ng.a)
                + (ng.a - T::one()) * elog_lambda
                - ng.a;
            elbo += e_log_p - e_log_q;
        }
    }
    elbo
}

fn beta_neg_entropy<T: Scalar>(a: T, b: T) -> T {
    let one = T::one();
    -(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
        + (a - one) * (digamma(a) - digamma(a + b))
        + (b - one) * (digamma(b) - digamma(a + b))
}

/// Digamma via upward recurrence into the asymptotic series.
pub fn digamma<T: Scalar>(x: T) -> T {
    let mut x = x;
    let mut result = T::zero();
    let cutoff = T::c(10.0);
    while x < cutoff {
        result -= T::one() / x;
        x += T::one();
    }
    let inv = T::one() / x;
    let inv2 = inv * inv;
    result + x.ln() - T::c(0.5) * inv
        - inv2
            * (T::c(1.0 / 12.0)
                - inv2 * (T::c(1.0 / 120.0) - inv2 * T::c(1.0 / 252.0)))
}

/// Log-gamma via the Lanczos approximation.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    const G: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    // Reflection not needed: all call sites use x > 0.
    let xm1 = x - T::one();
    let mut acc = T::c(G[0]);
    for (i, &g) in G.iter().enumerate().skip(1) {
        acc += T::c(g) / (xm1 + T::c(i as f64));
    }
    let t = xm1 + T::c(7.5);
    T::c(0.5 * (2.0 * std::f64::consts::PI).ln()) + (xm1 + T::c(0.5)) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn digamma_matches_known_values() {
        // psi(1) = -euler_gamma, psi(0.5) = -gamma - 2 ln 2.
        let gamma = 0.5772156649015329;
        assert!((digamma(1.0f64) + gamma).abs() < 1e-10);
        assert!((digamma(0.5f64) + gamma + 2.0 * 2.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        assert!((ln_gamma(5.0f64) - 24.0f64.ln()).abs() < 1e-10);
        assert!((ln_gamma(1.0f64)).abs() < 1e-10);
        assert!((ln_gamma(0.5f64) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-9);
    }

    fn gaussian_blob(center: (f64, f64), sigma: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = StdRng::seed_from_u64(seed);
        let dist = Normal::new(0.0, sigma).unwrap();
        (0..n)
            .map(|_| {
                vec![
                    center.0 + dist.sample(&mut rng),
                    center.1 + dist.sample(&mut rng),
                ]
            })
            .collect()
    }

    #[test]
    fn single_tight_gaussian_yields_one_dominant_cluster() {
        let pts = gaussian_blob((1.0, -2.0), 0.05, 500, 1);
        let res = dpmm_fit(&pts, &DpmmConfig::default(), 42);
        let biggest = res.clusters.iter().map(|c| c.members.len()).max().unwrap();
        assert!(biggest >= 495, "dominant cluster holds {biggest}/500");
    }

    #[test]
    fn two_separated_gaussians_recovered() {
        let mut pts = gaussian_blob((0.0, 0.0), 0.05, 500, 2);
        pts.extend(gaussian_blob((2.0, 0.0), 0.05, 500, 3));
        let cfg = DpmmConfig {
            min_members: 50,
            ..DpmmConfig::default()
        };
        let res = dpmm_fit(&pts, &cfg, 7);
        assert_eq!(res.clusters.len(), 2, "expected exactly two clusters");
        let mut means: Vec<f64> = res.clusters.iter().map(|c| c.mean[0]).collect();
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((means[0] - 0.0).abs() < 0.02);
        assert!((means[1] - 2.0).abs() < 0.02);
    }

    #[test]
    fn elbo_is_non_decreasing() {
        let mut pts = gaussian_blob((0.0, 0.0), 0.3, 200, 5);
        pts.extend(gaussian_blob((1.0, 1.0), 0.3, 200, 6));
        for seed in [0u64, 1, 2] {
            let res = dpmm_fit(&pts, &DpmmConfig::default(), seed);
            for w in res.elbo_trace.windows(2) {
                assert!(
                    w[1] >= w[0] - 1e-8,
                    "ELBO decreased: {} -> {} (seed {seed})",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn uniform_scatter_produces_loose_clusters() {
        let mut rng = StdRng::seed_from_u64(9);
        let pts: Vec<Vec<f64>> = (0..600)
            .map(|_| vec![rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)])
            .collect();
        let res = dpmm_fit(&pts, &DpmmConfig::default(), 3);
        // No cluster should look like a tight motif: 2-sigma ellipse area
        // 4*pi*sx*sz stays far above 0.25 m^2 for uniform scatter.
        for c in &res.clusters {
            if c.members.len() < 30 {
                continue;
            }
            let area = 4.0 * std::f64::consts::PI * c.var[0].sqrt() * c.var[1].sqrt();
            assert!(area > 0.25, "uniform cluster too tight: {area}");
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let pts = gaussian_blob((0.0, 0.0), 0.2, 300, 11);
        let a = dpmm_fit(&pts, &DpmmConfig::default(), 5);
        let b = dpmm_fit(&pts, &DpmmConfig::default(), 5);
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.elbo_trace.len(), b.elbo_trace.len());
    }
}
