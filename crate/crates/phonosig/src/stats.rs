//! Comparison statistics used to summarize and contrast result
//! distributions: descriptives, Welch's t, two-sample Kolmogorov-Smirnov,
//! one-way ANOVA, the Scholz-Stephens Anderson-Darling k-sample test, and
//! Pearson's r. All p-values come from asymptotic distributions.
//!
//! Also provides the Shapiro-Wilk W statistic (Royston's AS R94
//! approximation), which serves as the objective for the power-transform
//! search in [`crate::chars`].

use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample too small: need at least {required}, found {found}")]
    TooFew { required: usize, found: usize },
    #[error("sample too large for Shapiro-Wilk: {0} > 5000")]
    TooLarge(usize),
    #[error("degenerate sample: {0}")]
    Degenerate(&'static str),
    #[error("samples have mismatched lengths ({0} vs {1})")]
    MismatchedLengths(usize, usize),
    #[error("sample contains a non-finite value")]
    NonFinite,
}

/// Basic descriptives: sample mean, sample SD (n-1 denominator), and excess
/// kurtosis from biased central moments (m4/m2^2 - 3, defined for n >= 4).
#[derive(Debug, Clone, Copy)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub excess_kurtosis: Option<f64>,
}

pub fn summarize(xs: &[f64]) -> Result<SampleSummary, StatsError> {
    if xs.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let excess_kurtosis = if n >= 4 {
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
        if m2 > 0.0 {
            Some(m4 / (m2 * m2) - 3.0)
        } else {
            None
        }
    } else {
        None
    };
    Ok(SampleSummary {
        n,
        mean,
        sd,
        excess_kurtosis,
    })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t-test.
#[derive(Debug, Clone, Copy)]
pub struct WelchT {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    /// 95% confidence interval for mean(a) - mean(b).
    pub ci95: (f64, f64),
}

pub fn welch_t(a: &[f64], b: &[f64]) -> Result<WelchT, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFew {
            required: 2,
            found: a.len().min(b.len()),
        });
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    if va == 0.0 && vb == 0.0 {
        return Err(StatsError::Degenerate("both samples have zero variance"));
    }
    let sa = va / a.len() as f64;
    let sb = vb / b.len() as f64;
    let se = (sa + sb).sqrt();
    let t = (ma - mb) / se;
    let df = (sa + sb).powi(2)
        / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid df");
    let p = 2.0 * dist.cdf(-t.abs());
    let tcrit = dist.inverse_cdf(0.975);
    let diff = ma - mb;
    Ok(WelchT {
        t,
        df,
        p,
        ci95: (diff - tcrit * se, diff + tcrit * se),
    })
}

/// Two-sample Kolmogorov-Smirnov test with the classic Kolmogorov limit
/// distribution for the p-value.
#[derive(Debug, Clone, Copy)]
pub struct KsTest {
    pub statistic: f64,
    pub p: f64,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    if sa.iter().chain(sb.iter()).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);

    // Walk both ECDFs over the pooled values; at ties advance both before
    // comparing so the distance is evaluated at each distinct value.
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < sa.len() && j < sb.len() {
        let v = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= v {
            i += 1;
        }
        while j < sb.len() && sb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }

    let ne = na * nb / (na + nb);
    let p = kolmogorov_sf(ne.sqrt() * d);
    Ok(KsTest { statistic: d, p })
}

/// Survival function of the Kolmogorov limit distribution. Uses the theta
/// series for small arguments and the alternating series otherwise.
fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        let t = std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let mut s = 0.0;
        for k in 1..20 {
            let term = (-((2 * k - 1) as f64).powi(2) * t).exp();
            s += term;
            if term < 1e-18 {
                break;
            }
        }
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..100 {
        let term = (-2.0 * (k as f64).powi(2) * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-way fixed-effects analysis of variance.
#[derive(Debug, Clone, Copy)]
pub struct OneWayAnova {
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
}

pub fn anova_oneway(groups: &[&[f64]]) -> Result<OneWayAnova, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFew {
            required: 2,
            found: groups.len(),
        });
    }
    for g in groups {
        if g.len() < 2 {
            return Err(StatsError::TooFew {
                required: 2,
                found: g.len(),
            });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    let k = groups.len() as f64;
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (m - grand).powi(2);
        ss_within += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let df1 = k - 1.0;
    let df2 = n as f64 - k;
    if ss_within == 0.0 {
        return Err(StatsError::Degenerate("zero within-group variance"));
    }
    let f = (ss_between / df1) / (ss_within / df2);
    let dist = FisherSnedecor::new(df1, df2).expect("valid dfs");
    let p = 1.0 - dist.cdf(f);
    Ok(OneWayAnova { f, df1, df2, p })
}

/// Scholz-Stephens k-sample Anderson-Darling test (ties-adjusted version),
/// with the standardized statistic and an asymptotic p-value interpolated
/// on the logit scale from the published quantile coefficients.
#[derive(Debug, Clone, Copy)]
pub struct AndersonDarlingK {
    /// The ties-adjusted rank statistic A^2_akN.
    pub a2: f64,
    /// Standardized statistic (A^2 - (k-1)) / sigma_N.
    pub t_ad: f64,
    pub p: f64,
}

pub fn anderson_darling_k(groups: &[&[f64]]) -> Result<AndersonDarlingK, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFew {
            required: 2,
            found: k,
        });
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(StatsError::EmptySample);
    }
    let n_total: usize = groups.iter().map(|g| g.len()).sum();
    if n_total < 4 {
        return Err(StatsError::TooFew {
            required: 4,
            found: n_total,
        });
    }
    let mut pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    if pooled.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut distinct: Vec<f64> = Vec::with_capacity(pooled.len());
    for &v in &pooled {
        if distinct.last() != Some(&v) {
            distinct.push(v);
        }
    }

    let n = n_total as f64;
    let mut sorted_groups: Vec<Vec<f64>> = groups.iter().map(|g| g.to_vec()).collect();
    for g in &mut sorted_groups {
        g.sort_by(|x, y| x.partial_cmp(y).unwrap());
    }

    // Multiplicity of each distinct value in the pooled sample.
    let mut l = vec![0usize; distinct.len()];
    {
        let mut idx = 0;
        for &v in &pooled {
            while distinct[idx] < v {
                idx += 1;
            }
            l[idx] += 1;
        }
    }

    let mut a2 = 0.0;
    for g in &sorted_groups {
        let ni = g.len() as f64;
        let mut inner = 0.0;
        let mut f_run = 0.0; // observations of this sample strictly below z_j
        let mut b_run = 0.0; // pooled observations strictly below z_j
        let mut gi = 0usize;
        for (j, &z) in distinct.iter().enumerate() {
            let mut fij = 0.0;
            while gi < g.len() && g[gi] == z {
                fij += 1.0;
                gi += 1;
            }
            let lj = l[j] as f64;
            let maij = f_run + fij / 2.0;
            let baj = b_run + lj / 2.0;
            let denom = baj * (n - baj) - n * lj / 4.0;
            if denom > 0.0 {
                inner += (lj / n) * (n * maij - ni * baj).powi(2) / denom;
            }
            f_run += fij;
            b_run += lj;
        }
        a2 += inner / ni;
    }
    a2 *= (n - 1.0) / n;

    let sigma = ad_sigma(n_total, k, groups);
    let t_ad = (a2 - (k as f64 - 1.0)) / sigma;
    let p = ad_pvalue(t_ad, k - 1);
    Ok(AndersonDarlingK { a2, t_ad, p })
}

/// Null standard deviation of the k-sample statistic (Scholz-Stephens).
fn ad_sigma(n_total: usize, k: usize, groups: &[&[f64]]) -> f64 {
    let n = n_total as f64;
    let kf = k as f64;
    let h: f64 = groups.iter().map(|g| 1.0 / g.len() as f64).sum();
    // harmonic prefix sums: hsum[i] = 1 + 1/2 + ... + 1/i
    let mut hsum = vec![0.0; n_total];
    for i in 1..n_total {
        hsum[i] = hsum[i - 1] + 1.0 / i as f64;
    }
    let hh = hsum[n_total - 1];
    let mut g = 0.0;
    for i in 1..=(n_total - 2) {
        g += (hh - hsum[i]) / (n - i as f64);
    }

    let a = (4.0 * g - 6.0) * (kf - 1.0) + (10.0 - 6.0 * g) * h;
    let b = (2.0 * g - 4.0) * kf * kf + 8.0 * hh * kf + (2.0 * g - 14.0 * hh - 4.0) * h
        - 8.0 * hh
        + 4.0 * g
        - 6.0;
    let c = (6.0 * hh + 2.0 * g - 2.0) * kf * kf + (4.0 * hh - 4.0 * g + 6.0) * kf
        + (2.0 * hh - 6.0) * h
        + 4.0 * hh;
    let d = (2.0 * hh + 6.0) * kf * kf - 4.0 * hh * kf;
    let var = (a * n.powi(3) + b * n.powi(2) + c * n + d) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
    var.max(0.0).sqrt()
}

/// Asymptotic p-value for the standardized statistic. The published table
/// gives the null quantiles t_m(alpha) = b0 + b1/sqrt(m) + b2/m at seven
/// upper-tail levels; a quadratic fit of logit(alpha) against t_m is
/// evaluated at the observed statistic (extrapolating beyond the table, so
/// unlike a hard-capped lookup this can report p > 0.25).
fn ad_pvalue(t_ad: f64, m: usize) -> f64 {
    const LEVELS: [f64; 7] = [0.25, 0.10, 0.05, 0.025, 0.01, 0.005, 0.001];
    const B0: [f64; 7] = [0.675, 1.281, 1.645, 1.960, 2.326, 2.573, 3.085];
    const B1: [f64; 7] = [-0.245, 0.250, 0.678, 1.149, 1.822, 2.364, 3.615];
    const B2: [f64; 7] = [-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154];

    let mf = m as f64;
    let qs: Vec<f64> = (0..7)
        .map(|i| B0[i] + B1[i] / mf.sqrt() + B2[i] / mf)
        .collect();
    let logits: Vec<f64> = LEVELS.iter().map(|p| (p / (1.0 - p)).ln()).collect();

    // Least-squares quadratic logit(p) = c0 + c1 t + c2 t^2.
    let mut s = [0.0f64; 5];
    let mut sy = [0.0f64; 3];
    for (q, lp) in qs.iter().zip(logits.iter()) {
        for (j, sj) in s.iter_mut().enumerate() {
            *sj += q.powi(j as i32);
        }
        for (j, syj) in sy.iter_mut().enumerate() {
            *syj += lp * q.powi(j as i32);
        }
    }
    let coeffs = solve3(
        [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]],
        sy,
    );
    let lp = coeffs[0] + coeffs[1] * t_ad + coeffs[2] * t_ad * t_ad;
    let p = 1.0 / (1.0 + (-lp).exp());
    p.clamp(0.0, 1.0)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        *o = det(&m) / d;
    }
    out
}

/// Pearson product-moment correlation with a t-distributed p-value.
#[derive(Debug, Clone, Copy)]
pub struct PearsonR {
    pub r: f64,
    pub p: f64,
}

pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<PearsonR, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::MismatchedLengths(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(StatsError::TooFew {
            required: 3,
            found: a.len(),
        });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(StatsError::Degenerate("constant input"));
    }
    let r = (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0);
    let df = n - 2.0;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("valid df");
        2.0 * dist.cdf(-t.abs())
    };
    Ok(PearsonR { r, p })
}

/// Shapiro-Wilk W statistic via Royston's AS R94 approximation
/// (the coefficient construction used by standard statistical software).
/// Only the statistic is computed; it is used as a normality score to be
/// maximized, not as a test.
pub fn shapiro_wilk_w(xs: &[f64]) -> Result<f64, StatsError> {
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFew {
            required: 3,
            found: n,
        });
    }
    if n > 5000 {
        return Err(StatsError::TooLarge(n));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut x = xs.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let range = x[n - 1] - x[0];
    if range <= 0.0 {
        return Err(StatsError::Degenerate("all values identical"));
    }

    let nn2 = n / 2;
    let mut a = vec![0.0f64; nn2];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        let normal = Normal::standard();
        let an25 = n as f64 + 0.25;
        let mut summ2 = 0.0;
        for (i, ai) in a.iter_mut().enumerate() {
            *ai = normal.inverse_cdf((i as f64 + 1.0 - 0.375) / an25);
            summ2 += *ai * *ai;
        }
        summ2 *= 2.0;
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / (n as f64).sqrt();
        const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
        const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
        let a1 = poly(&C1, rsn) - a[0] / ssumm2;
        let (i1, fac) = if n > 5 {
            let a2 = -a[1] / ssumm2 + poly(&C2, rsn);
            let fac = ((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1])
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
                .sqrt();
            a[1] = a2;
            (2usize, fac)
        } else {
            let fac = ((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
            (1usize, fac)
        };
        a[0] = a1;
        for ai in a.iter_mut().skip(i1) {
            *ai = -*ai / fac;
        }
    }

    // W is the squared correlation between the ordered data and the
    // antisymmetric coefficient vector (-a[i] in the lower half, +a[i]
    // mirrored in the upper half, 0 in the middle for odd n).
    let coef = |i: usize| -> f64 {
        let j = n - 1 - i;
        if i < j {
            -a[i]
        } else if i > j {
            a[j]
        } else {
            0.0
        }
    };
    let mut sx = 0.0;
    let mut sa = 0.0;
    for (i, xi) in x.iter().enumerate() {
        sx += xi / range;
        sa += coef(i);
    }
    sx /= n as f64;
    sa /= n as f64;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in x.iter().enumerate() {
        let asa = coef(i) - sa;
        let xsx = xi / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    Ok((1.0 - w1).clamp(0.0, 1.0))
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn summarize_constant() {
        let s = summarize(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.excess_kurtosis, None);
    }

    #[test]
    fn summarize_kurtosis_of_normal_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let s = summarize(&xs).unwrap();
        assert!(s.excess_kurtosis.unwrap().abs() < 0.1);
        assert!((s.mean).abs() < 0.05);
        assert!((s.sd - 1.0).abs() < 0.05);
    }

    #[test]
    fn welch_identical_samples() {
        let r = welch_t(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_relative_eq!(r.p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn welch_hand_example() {
        // frozen against an independent implementation of the Welch formula
        let r = welch_t(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(r.t, -1.224744871391589, epsilon = 1e-12);
        assert_relative_eq!(r.df, 4.0, epsilon = 1e-12);
        assert_relative_eq!(r.p, 0.2878641347266908, epsilon = 1e-9);
        assert_relative_eq!(r.ci95.0, -3.266957935527523, epsilon = 1e-9);
        assert_relative_eq!(r.ci95.1, 1.2669579355275231, epsilon = 1e-9);
    }

    #[test]
    fn welch_swap_negates_t() {
        let a = [1.0, 2.5, 3.0, 4.0];
        let b = [2.0, 2.0, 5.0];
        let r1 = welch_t(&a, &b).unwrap();
        let r2 = welch_t(&b, &a).unwrap();
        assert_relative_eq!(r1.t, -r2.t, epsilon = 1e-12);
        assert_relative_eq!(r1.p, r2.p, epsilon = 1e-12);
    }

    #[test]
    fn welch_degenerate_errors() {
        assert!(welch_t(&[1.0, 1.0], &[2.0, 2.0]).is_err());
        assert!(welch_t(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ks_identical_is_zero() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_relative_eq!(r.p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ks_disjoint_is_one() {
        let r = ks_two_sample(&[0.0; 4], &[1.0; 4]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn ks_fixture_matches_limit_distribution() {
        // frozen from an independent evaluation of the Kolmogorov series
        let a = [0.1, 0.2, 0.35, 0.5, 0.8];
        let b = [0.15, 0.3, 0.45, 0.6, 0.9, 0.95];
        let r = ks_two_sample(&a, &b).unwrap();
        assert_relative_eq!(r.statistic, 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(r.p, 0.9223320078567805, epsilon = 1e-9);
    }

    #[test]
    fn ks_same_distribution_calibration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut ok = 0;
        for _ in 0..200 {
            let a: Vec<f64> = (0..500).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let b: Vec<f64> = (0..500).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if ks_two_sample(&a, &b).unwrap().p > 0.01 {
                ok += 1;
            }
        }
        assert!(ok >= 190, "only {ok}/200 repeats had p > 0.01");
    }

    #[test]
    fn anova_constant_groups_error() {
        let g1 = [1.0, 1.0, 1.0];
        let g2 = [1.0, 1.0];
        assert!(matches!(
            anova_oneway(&[&g1, &g2]),
            Err(StatsError::Degenerate(_))
        ));
    }

    #[test]
    fn anova_two_groups_equals_pooled_t_squared() {
        let a = [1.0, 2.0, 4.0, 3.5];
        let b = [2.5, 5.0, 6.0];
        let r = anova_oneway(&[&a, &b]).unwrap();
        // pooled-variance two-sample t
        let (ma, va) = mean_var(&a);
        let (mb, vb) = mean_var(&b);
        let sp2 = ((a.len() - 1) as f64 * va + (b.len() - 1) as f64 * vb)
            / (a.len() + b.len() - 2) as f64;
        let t = (ma - mb) / (sp2 * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt();
        assert_relative_eq!(r.f, t * t, epsilon = 1e-9);
    }

    #[test]
    fn anova_null_pvalues_spread_uniformly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ps = Vec::new();
        for _ in 0..200 {
            let gs: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..20).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            let refs: Vec<&[f64]> = gs.iter().map(|g| g.as_slice()).collect();
            ps.push(anova_oneway(&refs).unwrap().p);
        }
        // crude uniformity check on the null p-values
        let low = ps.iter().filter(|&&p| p < 0.5).count();
        assert!((70..=130).contains(&low), "median split {low}/200");
        assert!(ps.iter().filter(|&&p| p < 0.05).count() <= 25);
    }

    #[test]
    fn anderson_darling_published_fixture() {
        // Four-laboratory paper-smoothness data; expected values frozen from
        // an independent implementation of the ties-adjusted statistic.
        let s1 = [38.7, 41.5, 43.8, 44.5, 45.5, 46.0, 47.7, 58.0];
        let s2 = [39.2, 39.3, 39.7, 41.4, 41.8, 42.9, 43.3, 45.8];
        let s3 = [34.0, 35.0, 39.0, 40.0, 43.0, 43.0, 44.0, 45.0];
        let s4 = [34.0, 34.8, 34.8, 35.4, 37.2, 37.8, 41.2, 42.8];
        let r = anderson_darling_k(&[&s1, &s2, &s3, &s4]).unwrap();
        assert_relative_eq!(r.a2, 8.392609326838489, epsilon = 1e-9);
        assert_relative_eq!(r.t_ad, 4.479780627135335, epsilon = 1e-9);
        assert!(r.p < 0.01, "p = {}", r.p);
    }

    #[test]
    fn anderson_darling_identical_groups() {
        let g = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let r = anderson_darling_k(&[&g, &g, &g]).unwrap();
        assert!(r.p > 0.2, "p = {}", r.p);
        assert!(r.t_ad < 1.0);
    }

    #[test]
    fn anderson_darling_disjoint_groups() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| 100.0 + i as f64).collect();
        let r = anderson_darling_k(&[&a, &b]).unwrap();
        assert!(r.p < 0.01, "p = {}", r.p);
        assert!(r.a2 > 5.0);
    }

    #[test]
    fn pearson_perfect_correlation() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = pearson_r(&a, &a).unwrap();
        assert_relative_eq!(r.r, 1.0);
        assert_eq!(r.p, 0.0);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let r = pearson_r(&a, &neg).unwrap();
        assert_relative_eq!(r.r, -1.0);
    }

    #[test]
    fn pearson_constant_errors() {
        assert!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn pearson_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.random_range(3..30);
            let a: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let b: Vec<f64> = a
                .iter()
                .map(|x| 0.5 * x + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let got = match pearson_r(&a, &b) {
                Ok(r) => r.r,
                Err(_) => continue,
            };
            // direct formula oracle
            let nf = n as f64;
            let sa: f64 = a.iter().sum();
            let sb: f64 = b.iter().sum();
            let sab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let saa: f64 = a.iter().map(|x| x * x).sum();
            let sbb: f64 = b.iter().map(|x| x * x).sum();
            let want = (nf * sab - sa * sb)
                / ((nf * saa - sa * sa).sqrt() * (nf * sbb - sb * sb).sqrt());
            assert_relative_eq!(got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn shapiro_wilk_frozen_fixtures() {
        // frozen against an independent AS R94 implementation
        let x1 = [0.1, -0.5, 0.3, 1.2, -0.8, 0.4, -0.2, 0.9];
        assert_relative_eq!(
            shapiro_wilk_w(&x1).unwrap(),
            0.9797971853794207,
            epsilon = 1e-6
        );
        let x2 = [
            2.1, 3.4, 1.9, 5.6, 4.4, 2.7, 3.1, 3.0, 2.2, 4.9, 3.3, 3.8, 2.5, 4.1, 3.6, 2.9, 3.2,
            4.6, 1.5, 3.7,
        ];
        assert_relative_eq!(
            shapiro_wilk_w(&x2).unwrap(),
            0.9876583887674079,
            epsilon = 1e-6
        );
        assert_relative_eq!(
            shapiro_wilk_w(&[1.0, 2.0, 3.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let x4 = [1.0, 1.0, 1.0, 2.0, 50.0];
        assert_relative_eq!(
            shapiro_wilk_w(&x4).unwrap(),
            0.5659357157409135,
            epsilon = 1e-6
        );
    }

    #[test]
    fn shapiro_wilk_degenerate() {
        assert!(shapiro_wilk_w(&[1.0, 1.0, 1.0]).is_err());
        assert!(shapiro_wilk_w(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn welch_affine_invariance_of_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a: Vec<f64> = (0..15).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let b: Vec<f64> = (0..12).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let r = welch_t(&a, &b).unwrap();
        let scale = |xs: &[f64]| -> Vec<f64> { xs.iter().map(|x| 3.0 * x + 7.0).collect() };
        let r2 = welch_t(&scale(&a), &scale(&b)).unwrap();
        assert_relative_eq!(r.t, r2.t, epsilon = 1e-9);
        assert_relative_eq!(r.p, r2.p, epsilon = 1e-9);
    }
}
