//! Reference implementations used by the integration and acceptance tests.
//! They share no code with the library beyond plain data types.
#![allow(dead_code)]

use ndarray::Array2;

/// Fixed-step integration of the first-to-fire dynamics.
///
/// Each step advances by `dt`. If any active neuron would cross the
/// threshold within the step, the earliest crossing (by linear
/// interpolation) is taken as the next event, everything is advanced to it,
/// and the rates are rebuilt. Returns `(time, vehicle, task)`, 0-based.
pub fn fixed_step_events(gamma: &Array2<f64>, cm: &Array2<bool>, threshold: f64, dt: f64) -> Vec<(f64, usize, usize)> {
    let (n, m) = gamma.dim();
    let mut p = Array2::<f64>::zeros((n, m));
    let mut free = vec![true; n];
    let mut count = vec![0i32; m];
    let mut t = 0.0;
    let mut events = Vec::new();
    loop {
        let rate = |i: usize, j: usize, free: &[bool], count: &[i32]| {
            if free[i] && cm[[i, j]] {
                gamma[[i, j]] / 2f64.powi(count[j])
            } else {
                0.0
            }
        };
        let active = (0..n).any(|i| (0..m).any(|j| rate(i, j, &free, &count) > 0.0));
        if !active {
            return events;
        }
        // earliest crossing inside this step
        let mut hit: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in 0..m {
                let a = rate(i, j, &free, &count);
                if a <= 0.0 {
                    continue;
                }
                if p[[i, j]] + a * dt >= threshold {
                    let frac = ((threshold - p[[i, j]]) / a).max(0.0);
                    if hit.is_none_or(|(f, _, _)| frac < f - 1e-12) {
                        hit = Some((frac, i, j));
                    }
                }
            }
        }
        let step = hit.map_or(dt, |(f, _, _)| f);
        for i in 0..n {
            for j in 0..m {
                p[[i, j]] += step * rate(i, j, &free, &count);
            }
        }
        t += step;
        if let Some((_, i, j)) = hit {
            free[i] = false;
            count[j] += 1;
            events.push((t, i, j));
        }
    }
}

/// Reward of a task vector (1-based, 0 = none): per task, assigned rates
/// sorted descending and weighted 1, 1/2, 1/4, ...
pub fn reward(gamma: &Array2<f64>, tasks: &[usize]) -> f64 {
    let m = gamma.ncols();
    (1..=m)
        .map(|j| {
            let mut g: Vec<f64> = tasks
                .iter()
                .enumerate()
                .filter(|&(_, &t)| t == j)
                .map(|(i, _)| gamma[[i, j - 1]])
                .collect();
            g.sort_by(|a, b| b.partial_cmp(a).unwrap());
            g.iter().enumerate().map(|(k, x)| x * 0.5f64.powi(k as i32)).sum::<f64>()
        })
        .sum()
}

/// Every task vector in `{0..=m}^n`, in lexicographic order.
pub fn all_candidates(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=m).map(move |t| {
                    let mut v = prefix.clone();
                    v.push(t);
                    v
                })
            })
            .collect();
    }
    out
}

fn feasible(cm: &Array2<bool>, tasks: &[usize]) -> bool {
    tasks.iter().enumerate().all(|(i, &t)| t == 0 || cm[[i, t - 1]])
}

/// Best feasible reward and the candidates that reach it (within `tol`).
pub fn brute_best(gamma: &Array2<f64>, cm: &Array2<bool>, tol: f64) -> (f64, Vec<Vec<usize>>) {
    let (n, m) = gamma.dim();
    let scored: Vec<(Vec<usize>, f64)> = all_candidates(n, m)
        .into_iter()
        .filter(|c| feasible(cm, c))
        .map(|c| {
            let r = reward(gamma, &c);
            (c, r)
        })
        .collect();
    let best = scored.iter().map(|(_, r)| *r).fold(f64::MIN, f64::max);
    let argmax = scored.into_iter().filter(|(_, r)| *r >= best - tol).map(|(c, _)| c).collect();
    (best, argmax)
}

/// `(rank, total)` with rank = 1 + feasible candidates scoring more than
/// `target + tol`; infeasible candidates count towards the total only.
pub fn brute_rank(gamma: &Array2<f64>, cm: &Array2<bool>, target: f64, tol: f64) -> (u64, u64) {
    let (n, m) = gamma.dim();
    let all = all_candidates(n, m);
    let better = all
        .iter()
        .filter(|c| feasible(cm, c) && reward(gamma, c) > target + tol)
        .count() as u64;
    (better + 1, all.len() as u64)
}

/// `floor(10000 * (total - rank) / total)`, or 10000 for rank 1, in u128.
pub fn hundredths(rank: u128, total: u128) -> u128 {
    if rank == 1 {
        10_000
    } else {
        10_000 * (total - rank) / total
    }
}
