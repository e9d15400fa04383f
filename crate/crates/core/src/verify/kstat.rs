//! Unbiased k-statistics `k_1..k_4` and delete-one jackknife standard errors.

/// Power sums of `data`, shifted by `center` for conditioning.
fn power_sums(data: &[f64], center: f64) -> [f64; 4] {
    let mut s = [0.0; 4];
    for &x in data {
        let d = x - center;
        let d2 = d * d;
        s[0] += d;
        s[1] += d2;
        s[2] += d2 * d;
        s[3] += d2 * d2;
    }
    s
}

/// k-statistic of order `r ∈ 1..=4` from the power sums of `n` values.
fn kstat_from_sums(r: usize, s: &[f64; 4], n: f64) -> f64 {
    let [s1, s2, s3, s4] = *s;
    match r {
        1 => s1 / n,
        2 => (n * s2 - s1 * s1) / (n * (n - 1.0)),
        3 => (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0)),
        4 => {
            (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2
                - 3.0 * n * (n - 1.0) * s2 * s2
                - 4.0 * n * (n + 1.0) * s1 * s3
                + n * n * (n + 1.0) * s4)
                / (n * (n - 1.0) * (n - 2.0) * (n - 3.0))
        }
        _ => panic!("k-statistics are implemented for orders 1..=4"),
    }
}

fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// `k_r` of `data`; `r ∈ 1..=4`, `data.len() > r`. Orders ≥ 2 are shift invariant.
pub fn kstat(data: &[f64], r: usize) -> f64 {
    let c = mean(data);
    let s = power_sums(data, c);
    let k = kstat_from_sums(r, &s, data.len() as f64);
    if r == 1 {
        k + c
    } else {
        k
    }
}

/// Estimate with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Jackknife over observations of a statistic `f` computed from per-observation
/// contributions. `leave_out(i)` is the statistic without observation `i`.
fn jackknife(n: usize, full: f64, leave_out: impl Fn(usize) -> f64) -> Estimate {
    let nf = n as f64;
    let loo: Vec<f64> = (0..n).map(leave_out).collect();
    let m = mean(&loo);
    let var = (nf - 1.0) / nf * loo.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    Estimate {
        value: full,
        std_error: var.sqrt(),
    }
}

/// `k_r` with its delete-one jackknife standard error, in O(n).
pub fn kstat_jackknife(data: &[f64], r: usize) -> Estimate {
    kstat_difference_jackknife(data, None, r)
}

/// `k_r(a) − k_r(b)` for paired samples, jackknifed jointly over pairs.
/// With `b = None` this is `k_r(a)`.
pub fn kstat_difference_jackknife(a: &[f64], b: Option<&[f64]>, r: usize) -> Estimate {
    let n = a.len();
    let nf = n as f64;
    let ca = mean(a);
    let sa = power_sums(a, ca);
    let sb = b.map(|b| {
        let cb = mean(b);
        (cb, power_sums(b, cb))
    });
    let stat = |sa: &[f64; 4], sb: Option<&[f64; 4]>, m: f64| {
        kstat_from_sums(r, sa, m) - sb.map_or(0.0, |s| kstat_from_sums(r, s, m))
    };
    let minus = |s: &[f64; 4], d: f64| {
        let d2 = d * d;
        [s[0] - d, s[1] - d2, s[2] - d2 * d, s[3] - d2 * d2]
    };
    let full = stat(&sa, sb.as_ref().map(|x| &x.1), nf);
    let mut est = jackknife(n, full, |i| {
        let la = minus(&sa, a[i] - ca);
        let lb = sb.as_ref().zip(b).map(|((cb, s), b)| minus(s, b[i] - cb));
        stat(&la, lb.as_ref(), nf - 1.0)
    });
    if r == 1 {
        est.value += ca - sb.map_or(0.0, |(cb, _)| cb);
    }
    est
}

/// Sample mean with standard error `sd/√n`.
pub fn mean_estimate(data: &[f64]) -> Estimate {
    let n = data.len() as f64;
    let m = mean(data);
    let var = data.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate {
        value: m,
        std_error: (var / n).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // brute-force k-statistics from central moments (independent formulas)
    fn oracle(data: &[f64]) -> [f64; 4] {
        let n = data.len() as f64;
        let m = data.iter().sum::<f64>() / n;
        let c = |p: i32| data.iter().map(|x| (x - m).powi(p)).sum::<f64>() / n;
        let (m2, m3, m4) = (c(2), c(3), c(4));
        let k2 = n / (n - 1.0) * m2;
        let k3 = n * n / ((n - 1.0) * (n - 2.0)) * m3;
        let k4 = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
        [m, k2, k3, k4]
    }

    #[test]
    fn matches_central_moment_oracle() {
        let data = [1.3, -0.2, 4.1, 2.2, 0.0, 7.5, -3.3, 1.1, 0.9];
        let o = oracle(&data);
        for r in 1..=4 {
            assert_relative_eq!(kstat(&data, r), o[r - 1], max_relative = 1e-10);
        }
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let data: Vec<f64> = (0..25).map(|i| ((i * 37 % 11) as f64).sqrt() - 1.5).collect();
        for r in 1..=4 {
            let fast = kstat_jackknife(&data, r);
            let n = data.len();
            let loo: Vec<f64> = (0..n)
                .map(|i| {
                    let v: Vec<f64> = data
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, x)| *x)
                        .collect();
                    kstat(&v, r)
                })
                .collect();
            let m = loo.iter().sum::<f64>() / n as f64;
            let se = ((n as f64 - 1.0) / n as f64 * loo.iter().map(|x| (x - m).powi(2)).sum::<f64>()).sqrt();
            assert_relative_eq!(fast.value, kstat(&data, r), max_relative = 1e-10);
            assert_relative_eq!(fast.std_error, se, max_relative = 1e-6);
        }
    }

    #[test]
    fn paired_difference_of_identical_samples_is_zero() {
        let data = [0.5, 1.5, -2.0, 3.0, 0.25, 1.0];
        let d = kstat_difference_jackknife(&data, Some(&data), 2);
        assert_eq!(d.value, 0.0);
        assert_eq!(d.std_error, 0.0);
    }
}
