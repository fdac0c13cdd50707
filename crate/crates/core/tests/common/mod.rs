//! Independent reference implementations shared by the test targets.
#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn explicit_correlation(x: &mipcr::data::Matrix) -> Vec<Vec<f64>> {
    let (n, p) = x.shape();
    let cols: Vec<Vec<f64>> = (0..p).map(|j| x.column(j).iter().copied().collect()).collect();
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let mut r = vec![vec![0.0; p]; p];
    for a in 0..p {
        for b in 0..p {
            let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let da = cols[a][i] - means[a];
                let db = cols[b][i] - means[b];
                sab += da * db;
                saa += da * da;
                sbb += db * db;
            }
            r[a][b] = sab / (saa * sbb).sqrt();
        }
    }
    r
}

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
pub fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = a.len();
    let mut v = vec![vec![0.0; p]; p];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for k in 0..p {
            for l in (k + 1)..p {
                if a[k][l].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[l][l] - a[k][k]) / (2.0 * a[k][l]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..p {
                    let (aik, ail) = (a[i][k], a[i][l]);
                    a[i][k] = c * aik - s * ail;
                    a[i][l] = s * aik + c * ail;
                }
                for i in 0..p {
                    let (aki, ali) = (a[k][i], a[l][i]);
                    a[k][i] = c * aki - s * ali;
                    a[l][i] = s * aki + c * ali;
                }
                for row in v.iter_mut() {
                    let (vk, vl) = (row[k], row[l]);
                    row[k] = c * vk - s * vl;
                    row[l] = s * vk + c * vl;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = idx.iter().map(|&k| a[k][k]).collect();
    let vectors = idx
        .iter()
        .map(|&k| (0..p).map(|i| v[i][k]).collect())
        .collect();
    (values, vectors)
}

pub struct Oracle {
    pub qbar: f64,
    pub w: f64,
    pub b: f64,
    pub t: f64,
    pub df: f64,
    pub lo: f64,
    pub hi: f64,
}

/// 0.975 quantile found by bisection on the CDF.
pub fn t_quantile(df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    let (mut lo, mut hi) = (0.0f64, 1000.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) < 0.975 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn rubin_oracle(pairs: &[(f64, f64)], nu_com: f64) -> Oracle {
    let m = pairs.len() as f64;
    let qbar = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let w = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let b = if pairs.iter().all(|p| p.0 == pairs[0].0) {
        0.0
    } else {
        pairs.iter().map(|p| (p.0 - qbar) * (p.0 - qbar)).sum::<f64>() / (m - 1.0)
    };
    let t = w + b + b / m;
    let df = if b == 0.0 {
        nu_com
    } else {
        let lambda = (b + b / m) / t;
        let nu_old = (m - 1.0) / lambda.powi(2);
        let nu_obs = (nu_com + 1.0) / (nu_com + 3.0) * nu_com * (1.0 - lambda);
        1.0 / (1.0 / nu_old + 1.0 / nu_obs)
    };
    let half = t_quantile(df) * t.sqrt();
    Oracle {
        qbar,
        w,
        b,
        t,
        df,
        lo: qbar - half,
        hi: qbar + half,
    }
}
