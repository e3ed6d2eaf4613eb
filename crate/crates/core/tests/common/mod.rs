//! Reference computations written independently of the library.
#![allow(dead_code)]

use num_bigint::BigUint;
use pilot_core::{FadingTensor, PilotAssignment};

pub fn primes_upto(n: u32) -> Vec<u32> {
    (2..=n).filter(|&p| (2..p).all(|d| p % d != 0)).collect()
}

/// `(n!)^power` from the prime factorization of `n!` (Legendre's formula).
pub fn factorial_power(n: u32, power: u32) -> BigUint {
    primes_upto(n).into_iter().fold(BigUint::from(1u32), |acc, p| {
        let mut e = 0;
        let mut q = p;
        while q <= n {
            e += n / q;
            q *= p;
        }
        acc * BigUint::from(p).pow(e * power)
    })
}

/// Sum of `log2(1 + SINR)` over all users, written directly from the
/// definition: the user of cell `i` on pilot `p` is interfered by the users
/// of every other cell holding pilot `p`, as seen at BS `i`. `cap` applies
/// only without interferers.
pub fn oracle_objective(beta: &FadingTensor, rows: &[Vec<usize>], cap: f64) -> f64 {
    let l = rows.len();
    let mut total = 0.0;
    for i in 0..l {
        for (u, &p) in rows[i].iter().enumerate() {
            let signal = beta.get(i, i, u).powi(2);
            let mut interference = 0.0;
            for (j, row) in rows.iter().enumerate() {
                if j == i {
                    continue;
                }
                let v = row.iter().position(|&q| q == p).unwrap();
                interference += beta.get(i, j, v).powi(2);
            }
            total += if l == 1 { cap } else { (1.0 + signal / interference).log2() };
        }
    }
    total
}

/// All permutations of `0..k` (Heap's algorithm).
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn heap(n: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..n - 1 {
            heap(n - 1, a, out);
            if n % 2 == 1 {
                a.swap(0, n - 1);
            } else {
                a.swap(i, n - 1);
            }
        }
        heap(n - 1, a, out);
    }
    let mut out = Vec::new();
    heap(k, &mut (0..k).collect(), &mut out);
    out
}

/// Maximum objective over every assignment with an identity first row.
pub fn oracle_optimum(beta: &FadingTensor, cap: f64) -> f64 {
    let (l, k) = (beta.cells(), beta.users());
    let perms = permutations(k);
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; l - 1];
    loop {
        let mut rows = vec![(0..k).collect::<Vec<_>>()];
        rows.extend(idx.iter().map(|&i| perms[i].clone()));
        best = best.max(oracle_objective(beta, &rows, cap));
        let mut d = 0;
        loop {
            if d == idx.len() {
                return best;
            }
            idx[d] += 1;
            if idx[d] < perms.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

pub fn is_permutation(row: &[usize]) -> bool {
    let mut seen = vec![false; row.len()];
    row.iter().all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true))
}

pub fn assignment_ok(a: &PilotAssignment) -> bool {
    let rows = a.to_rows();
    rows.iter().all(|r| is_permutation(r)) && rows[0].iter().enumerate().all(|(u, &p)| u == p)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Coefficient of determination of the least-squares line through `(x, y)`.
pub fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - (intercept + slope * a)).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

/// First-order stochastic dominance of `a` over `b` in their empirical CDFs:
/// at every value, the mass of `a` at or below it is no greater than `b`'s.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter().chain(b).all(|&x| cdf(a, x) <= cdf(b, x))
}
