use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

use super::scores::{rank, TieRule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumTest {
    /// Rank sum of the first sample within the pooled sample.
    pub statistic: f64,
    pub z: f64,
    pub p: f64,
}

/// Two-sided Wilcoxon rank-sum test, normal approximation with the
/// tie-corrected variance. `continuity` shrinks |W − μ| by 0.5.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], continuity: bool) -> Result<RankSumTest> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < 2 || n2 < 2 {
        return Err(Error::invalid("rank-sum test needs at least two values per sample"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("rank-sum test on non-finite values"));
    }
    let ranks = rank(&pooled, TieRule::Average);
    let w: f64 = ranks[..n1].iter().sum();
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    let mean = n1f * (n + 1.0) / 2.0;

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(RankSumTest { statistic: w, z: 0.0, p: 1.0 });
    }
    let mut dev = (w - mean).abs();
    if continuity {
        dev = (dev - 0.5).max(0.0);
    }
    let z = (w - mean).signum() * dev / var.sqrt();
    let p = erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0);
    Ok(RankSumTest { statistic: w, z, p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub t: f64,
    pub df: usize,
    pub p_two_sided: f64,
    /// Tail in the direction of the observed mean difference: half the
    /// two-sided value.
    pub p_one_sided: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    #[default]
    OneSided,
    TwoSided,
}

impl PairedTTest {
    pub fn p(&self, tail: Tail) -> f64 {
        match tail {
            Tail::OneSided => self.p_one_sided,
            Tail::TwoSided => self.p_two_sided,
        }
    }
}

/// Two-sided upper-tail probability of Student's t with `df` degrees of
/// freedom: `I_{df/(df+t²)}(df/2, 1/2)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Paired t-test on the differences `a − b`, `df = K − 1`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("paired samples of length {} and {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::invalid("paired t-test needs at least two pairs"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let k = d.len() as f64;
    let df = d.len() - 1;
    let mean = d.iter().sum::<f64>() / k;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let (t, p) = if var == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (var / k).sqrt();
        (t, student_t_two_sided(t, df as f64))
    };
    if t.is_nan() {
        return Err(Error::Numeric("paired t-test statistic is NaN".into()));
    }
    Ok(PairedTTest {
        t,
        df,
        p_two_sided: p,
        p_one_sided: if p >= 1.0 { 1.0 } else { p / 2.0 },
    })
}

/// Connected components of the graph joining models whose pairwise p-value
/// is at least `alpha`. Groups are ordered by their smallest member.
pub fn significance_groups(p: &[Vec<f64>], alpha: f64) -> Vec<Vec<usize>> {
    let n = p.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if p[i][j] >= alpha {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exact two-sided rank-sum p by enumerating every assignment of pooled
    /// ranks to the first sample.
    fn exact_rank_sum_p(a: &[f64], b: &[f64]) -> f64 {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let ranks = rank(&pooled, TieRule::Average);
        let n = pooled.len();
        let n1 = a.len();
        let mean = n1 as f64 * (n as f64 + 1.0) / 2.0;
        let observed = (ranks[..n1].iter().sum::<f64>() - mean).abs();
        let (mut extreme, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n1 {
                continue;
            }
            let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            total += 1;
            if (w - mean).abs() >= observed - 1e-9 {
                extreme += 1;
            }
        }
        extreme as f64 / total as f64
    }

    #[test]
    fn identical_samples() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], false).unwrap();
        assert_eq!((r.z, r.p), (0.0, 1.0));
        let r = wilcoxon_rank_sum(&[5.0, 5.0], &[5.0, 5.0, 5.0], false).unwrap();
        assert_eq!(r.p, 1.0);
        assert!(wilcoxon_rank_sum(&[1.0], &[2.0, 3.0], false).is_err());
    }

    #[test]
    fn separated_samples_against_enumeration() {
        let (a, b) = ([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]);
        let exact = exact_rank_sum_p(&a, &b);
        assert!((exact - 0.1).abs() < 1e-12);
        let approx = wilcoxon_rank_sum(&a, &b, true).unwrap();
        assert!((approx.p - exact).abs() < 0.05, "{} vs {exact}", approx.p);
        assert_eq!(approx.statistic, 6.0);
    }

    #[test]
    fn tie_corrected_variance_matches_permutation_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            // coarse grid forces ties
            let a: Vec<f64> = (0..7).map(|_| rng.random_range(0..6) as f64).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.random_range(1..7) as f64).collect();
            let pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
            let ranks = rank(&pooled, TieRule::Average);
            let (mut s1, mut s2, mut count) = (0.0, 0.0, 0.0);
            for mask in 0u32..(1 << 15) {
                if mask.count_ones() != 7 {
                    continue;
                }
                let w: f64 = (0..15).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
                s1 += w;
                s2 += w * w;
                count += 1.0;
            }
            let var = s2 / count - (s1 / count).powi(2);
            let r = wilcoxon_rank_sum(&a, &b, false).unwrap();
            let implied = ((r.statistic - s1 / count) / r.z).powi(2);
            if r.z != 0.0 {
                assert!((implied - var).abs() < 1e-9 * var, "{implied} vs {var}");
            }
            let exact = exact_rank_sum_p(&a, &b);
            assert!((r.p - exact).abs() < 0.1, "{a:?} {b:?}: {} vs {exact}", r.p);
        }
    }

    #[test]
    fn rank_sum_is_symmetric() {
        let a = [0.1, 0.4, 0.4, 0.9, 0.2];
        let b = [0.3, 0.4, 0.8, 0.05];
        let ab = wilcoxon_rank_sum(&a, &b, false).unwrap();
        let ba = wilcoxon_rank_sum(&b, &a, false).unwrap();
        assert!((ab.p - ba.p).abs() < 1e-15);
        assert!((ab.z + ba.z).abs() < 1e-15);
    }

    /// Simpson integration of the t density over [|t|, ∞) via the
    /// substitution t = |t| + u/(1−u).
    fn t_tail_by_quadrature(t: f64, df: f64) -> f64 {
        use statrs::function::gamma::ln_gamma;
        let c = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt();
        let f = |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let x = t.abs() + u / (1.0 - u);
            c * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0) / (1.0 - u).powi(2)
        };
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        2.0 * s * h / 3.0
    }

    #[test]
    fn student_tail_against_quadrature() {
        for (t, df) in [(2.5, 3.0), (0.7, 40.0), (6.0, 10.0), (1.0, 2.0), (0.1, 43.0)] {
            let q = t_tail_by_quadrature(t, df);
            let p = student_t_two_sided(t, df);
            assert!((p - q).abs() < 1e-9, "t={t} df={df}: {p} vs {q}");
        }
    }

    #[test]
    fn paired_t_reference_values() {
        let r = paired_t_test(&[0.3, 0.1, 0.4, 0.15, 0.9], &[0.1, 0.2, 0.1, 0.05, 0.3]).unwrap();
        assert_eq!(r.df, 4);
        assert!((r.t - 1.900510536278992).abs() < 1e-12);
        assert!((r.p_two_sided - 0.13016218077505892).abs() < 1e-10);
        assert!((r.p_one_sided * 2.0 - r.p_two_sided).abs() < 1e-15);
    }

    #[test]
    fn paired_t_degenerate_cases() {
        let same = paired_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((same.t, same.p_two_sided, same.p_one_sided), (0.0, 1.0, 1.0));
        let alt = paired_t_test(&[1.0, -1.0, 1.0, -1.0], &[0.0; 4]).unwrap();
        assert_eq!(alt.t, 0.0);
        assert!((alt.p_two_sided - 1.0).abs() < 1e-15);
        let shift = paired_t_test(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(shift.p_two_sided, 0.0);
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn grouping() {
        let ones = vec![vec![1.0; 3]; 3];
        assert_eq!(significance_groups(&ones, 0.05), vec![vec![0, 1, 2]]);
        let zeros = vec![vec![0.0; 3]; 3];
        assert_eq!(significance_groups(&zeros, 0.05), vec![vec![0], vec![1], vec![2]]);
        // chain 0-2, 2-3 links 0 and 3 even though p(0,3) is small
        let mut p = vec![vec![0.0; 4]; 4];
        for (i, j) in [(0, 2), (2, 3)] {
            p[i][j] = 0.5;
            p[j][i] = 0.5;
        }
        assert_eq!(significance_groups(&p, 0.05), vec![vec![0, 2, 3], vec![1]]);
    }
}
