//! Independent reference implementations shared by the integration tests
//! and the acceptance suite.

#![allow(dead_code)]

use ldpc_energy::density_evolution::FaultOperator;

/// Quantizer on `x = twice_x / 2`, in integer arithmetic: round half away
/// from zero, saturate at `Q = 2^(q-1) - 1`, `sign(0) = +1`.
pub fn quantize_oracle(twice_x: i64, q: u32) -> i64 {
    let max = (1i64 << (q - 1)) - 1;
    let mag = ((twice_x.abs() + 1) / 2).min(max);
    if twice_x < 0 {
        -mag
    } else {
        mag
    }
}

/// Value stored in a `width`-bit sign-magnitude word; the top bit is the
/// sign, `-0` reads as `0`.
pub fn sign_magnitude_value(word: u32, width: u32) -> i32 {
    let mag = (word & ((1 << (width - 1)) - 1)) as i32;
    if word >> (width - 1) & 1 == 1 {
        -mag
    } else {
        mag
    }
}

pub fn sign_magnitude_word(v: i32, width: u32) -> u32 {
    let mag = v.unsigned_abs();
    if v < 0 {
        mag | 1 << (width - 1)
    } else {
        mag
    }
}

/// Offset Min-Sum outputs by definition: for each edge the product of the
/// other signs and `max(min of the other magnitudes - lambda, 0)`.
pub fn min_sum_oracle(inputs: &[i32], lambda: i32) -> Vec<i32> {
    (0..inputs.len())
        .map(|k| {
            let others = inputs.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, &x)| x);
            let negative = others.clone().filter(|&x| x < 0).count() % 2 == 1;
            let mag = (others.map(i32::abs).min().unwrap() - lambda).max(0);
            if negative {
                -mag
            } else {
                mag
            }
        })
        .collect()
}

/// Calls `f` with every tuple in `[0, radix)^len`.
pub fn for_each_tuple(len: usize, radix: usize, mut f: impl FnMut(&[usize])) {
    let mut t = vec![0usize; len];
    loop {
        f(&t);
        let mut k = 0;
        loop {
            if k == len {
                return;
            }
            t[k] += 1;
            if t[k] < radix {
                break;
            }
            t[k] = 0;
            k += 1;
        }
    }
}

/// Exact pmf (on `{-Q, .., Q}`) of the faulty message leaving a check of
/// protograph row `row` after the first flooding iteration: every other
/// neighbour sends its channel value, the check applies offset Min-Sum and
/// the stored word is XORed with a Bernoulli(eps) pattern.
/// Enumerates all channel values of the check's other variables and all
/// fault patterns.
pub fn first_check_output(rows: &[Vec<u32>], row: usize, q: u32, eps: f64, lambda: i32, channel: &[f64]) -> Vec<f64> {
    let max = (1i32 << (q - 1)) - 1;
    let dim = (2 * max + 1) as usize;
    let leaves: usize = rows[row].iter().map(|&s| s as usize).sum::<usize>() - 1;
    let mut out = vec![0.0; dim];
    for_each_tuple(leaves, dim, |t| {
        let vals: Vec<i32> = t.iter().map(|&k| k as i32 - max).collect();
        let p: f64 = t.iter().map(|&k| channel[k]).product();
        if p == 0.0 {
            return;
        }
        // output towards the root: Min-Sum over the leaves, as edge 0 of
        // [root, leaves...]
        let mut inputs = vec![0];
        inputs.extend_from_slice(&vals);
        let clean = min_sum_oracle(&inputs, lambda)[0];
        let word = sign_magnitude_word(clean, q);
        for pattern in 0..(1u32 << q) {
            let h = pattern.count_ones() as i32;
            let pf = eps.powi(h) * (1.0 - eps).powi(q as i32 - h);
            let read = sign_magnitude_value(word ^ pattern, q);
            out[(read + max) as usize] += p * pf;
        }
    });
    out
}

/// Bit error probability after one flooding iteration of the tree-like
/// decoder, averaged over protograph columns, with ties counted as half an
/// error. Exhaustive over the root channel value and every combination of
/// incoming check messages.
pub fn first_iteration_error(rows: &[Vec<u32>], q: u32, eps: f64, lambda: i32, channel: &[f64]) -> f64 {
    let max = (1i32 << (q - 1)) - 1;
    let dim = (2 * max + 1) as usize;
    let cols = rows[0].len();
    let mut total = 0.0;
    for col in 0..cols {
        let mut incoming: Vec<Vec<f64>> = Vec::new();
        for (j, row) in rows.iter().enumerate() {
            if row[col] == 0 {
                continue;
            }
            let pmf = first_check_output(rows, j, q, eps, lambda, channel);
            for _ in 0..row[col] {
                incoming.push(pmf.clone());
            }
        }
        let mut err = 0.0;
        for_each_tuple(incoming.len() + 1, dim, |t| {
            let mut p = channel[t[0]];
            let mut sum = t[0] as i64 - max as i64;
            for (k, &v) in t[1..].iter().enumerate() {
                p *= incoming[k][v];
                sum += v as i64 - max as i64;
            }
            if sum < 0 {
                err += p;
            } else if sum == 0 {
                err += 0.5 * p;
            }
        });
        total += err;
    }
    total / cols as f64
}

/// Checks the structural properties of the value-level fault operator.
pub fn fault_operator_violations(q: u32, epsilons: &[f64]) -> Vec<String> {
    let mut bad = Vec::new();
    let max = (1i32 << (q - 1)) - 1;
    let identity = FaultOperator::new(q, 0.0).unwrap();
    for v in -max..=max {
        for w in -max..=max {
            let want = if v == w { 1.0 } else { 0.0 };
            if identity.entry(v, w) != want {
                bad.push(format!("q={q}: T_0[{v}][{w}] = {}", identity.entry(v, w)));
            }
        }
    }
    let half = FaultOperator::new(q, 0.5).unwrap();
    let unit = 1.0 / f64::from(1u32 << q);
    for v in -max..=max {
        for w in -max..=max {
            let want = if w == 0 { 2.0 * unit } else { unit };
            if (half.entry(v, w) - want).abs() > 1e-12 {
                bad.push(format!("q={q}: T_1/2[{v}][{w}] = {} != {want}", half.entry(v, w)));
            }
        }
    }
    for &eps in epsilons {
        let t = FaultOperator::new(q, eps).unwrap();
        for v in -max..=max {
            let sum: f64 = t.row(v).iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                bad.push(format!("q={q} eps={eps}: row {v} sums to {sum}"));
            }
            for w in -max..=max {
                // zero is stored as +0, so negation commutes for v != 0 only;
                // for v = 0 the sign bit of the read is a plain Bernoulli(eps)
                if v != 0 && (t.entry(v, w) - t.entry(-v, -w)).abs() > 1e-12 {
                    bad.push(format!("q={q} eps={eps}: T[{v}][{w}] != T[{}][{}]", -v, -w));
                }
                if v == 0 && w > 0 && (t.entry(0, w) * eps - t.entry(0, -w) * (1.0 - eps)).abs() > 1e-12 {
                    bad.push(format!("q={q} eps={eps}: sign of a read of 0 is biased"));
                }
                // pattern-level oracle
                let from = sign_magnitude_word(v, q);
                let mut want = 0.0;
                for word in 0..(1u32 << q) {
                    if sign_magnitude_value(word, q) == w {
                        let h = (from ^ word).count_ones() as i32;
                        want += eps.powi(h) * (1.0 - eps).powi(q as i32 - h);
                    }
                }
                if (t.entry(v, w) - want).abs() > 1e-12 {
                    bad.push(format!("q={q} eps={eps}: T[{v}][{w}] = {} != {want}", t.entry(v, w)));
                }
            }
        }
    }
    bad
}

/// `erf` by its Maclaurin series (accurate to ~1e-16 for `|x| < 3`).
pub fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-18 * sum.abs() {
        n += 1.0;
        term *= -x * x / n;
        sum += term / (2.0 * n + 1.0);
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

/// BPSK hard-decision crossover `Q(sqrt(snr))` from the series oracle.
pub fn crossover_oracle(snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    0.5 * (1.0 - erf_series((snr / 2.0).sqrt()))
}
