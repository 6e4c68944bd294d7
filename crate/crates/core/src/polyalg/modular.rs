//! Multi-modular resultants: Kronecker-pack the remaining variables into one,
//! evaluate at consecutive points modulo word-size primes, take univariate
//! resultants by the Euclidean algorithm, interpolate, and lift by CRT.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::{Budget, IntPoly, Monomial, PolyError, Var};

pub(super) enum Outcome {
    Done(IntPoly),
    /// Packed degree bound over the limit.
    TooLarge(usize),
    /// Nothing to pack, or too few usable primes.
    Declined,
}

/// Largest packed degree handled here; bigger inputs go to Bareiss.
pub(super) const MAX_PACKED_DEGREE: usize = 1 << 14;

fn primes(count: usize) -> Vec<u64> {
    static CACHE: OnceLock<Mutex<Vec<u64>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(|| Mutex::new(Vec::new())).lock().expect("prime cache");
    let mut next = cache.last().map_or((1u64 << 62) - 1, |&p| p - 2);
    while cache.len() < count {
        if primal_check::miller_rabin(next) {
            cache.push(next);
        }
        next -= 2;
    }
    cache[..count].to_vec()
}

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(p)) as u64
}

#[inline]
fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

fn reduce(c: &BigInt, p: u64) -> u64 {
    let r = (c.magnitude() % p).to_u64().expect("residue fits");
    if c.is_negative() && r != 0 {
        p - r
    } else {
        r
    }
}

/// `Res(a, b)` over `F_p` for dense coefficient vectors with nonzero leading entries.
fn univariate_resultant(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> u64 {
    let mut acc = 1u64;
    loop {
        while a.len() > 1 && *a.last().expect("nonempty") == 0 {
            a.pop();
        }
        while b.len() > 1 && *b.last().expect("nonempty") == 0 {
            b.pop();
        }
        let da = a.len() - 1;
        let db = b.len() - 1;
        if db == 0 {
            return mulmod(acc, powmod(b[0], da as u64, p), p);
        }
        if da == 0 {
            return mulmod(acc, powmod(a[0], db as u64, p), p);
        }
        // r = a mod b
        let lb_inv = invmod(b[db], p);
        let mut r = a.clone();
        for i in (db..=da).rev() {
            let q = mulmod(r[i], lb_inv, p);
            if q == 0 {
                continue;
            }
            for k in 0..=db {
                r[i - db + k] = submod(r[i - db + k], mulmod(q, b[k], p), p);
            }
        }
        r.truncate(db);
        while r.len() > 1 && *r.last().expect("nonempty") == 0 {
            r.pop();
        }
        if r.iter().all(|&x| x == 0) {
            return 0;
        }
        let dr = r.len() - 1;
        acc = mulmod(acc, powmod(b[db], (da - dr) as u64, p), p);
        if da % 2 == 1 && db % 2 == 1 {
            acc = (p - acc) % p;
        }
        a = b;
        b = r;
    }
}

/// Sparse packed polynomial: (packed exponent, coefficient).
type Packed = Vec<(usize, BigInt)>;

struct Plan {
    vars: Vec<Var>,
    strides: Vec<usize>,
    bounds: Vec<usize>,
    degree: usize,
}

impl Plan {
    fn pack(&self, p: &IntPoly) -> Packed {
        p.terms()
            .map(|(m, c)| {
                let e = m.pairs().iter().map(|&(v, k)| {
                    let i = self.vars.binary_search(&v).expect("known variable");
                    k as usize * self.strides[i]
                });
                (e.sum(), c.clone())
            })
            .collect()
    }

    fn unpack(&self, mut e: usize) -> Monomial {
        let mut pairs = Vec::new();
        for i in (0..self.vars.len()).rev() {
            let k = e / self.strides[i];
            e %= self.strides[i];
            if k > 0 {
                pairs.push((self.vars[i], k as u32));
            }
        }
        Monomial::from_pairs(pairs)
    }
}

fn one_norm_bits(cs: &[IntPoly]) -> u64 {
    let s: BigInt = cs.iter().flat_map(|c| c.terms().map(|(_, x)| x.abs())).sum();
    s.bits()
}

/// Resultant in `v` of the polynomials with coefficient lists `fc`, `gc`
/// (indexed by power of `v`, nonzero leading entries).
pub(super) fn resultant(fc: &[IntPoly], gc: &[IntPoly], budget: &Budget) -> Result<Outcome, PolyError> {
    let df = fc.len() - 1;
    let dg = gc.len() - 1;
    let mut vars: Vec<Var> = fc.iter().chain(gc).flat_map(|c| c.variables()).collect();
    vars.sort();
    vars.dedup();
    if vars.is_empty() {
        return Ok(Outcome::Declined);
    }
    let deg = |cs: &[IntPoly], v: Var| cs.iter().filter_map(|c| c.degree(v)).max().unwrap_or(0) as usize;
    let mut strides = Vec::with_capacity(vars.len());
    let mut bounds = Vec::with_capacity(vars.len());
    let mut stride = 1usize;
    for &v in &vars {
        let b = dg * deg(fc, v) + df * deg(gc, v);
        strides.push(stride);
        bounds.push(b);
        stride = match stride.checked_mul(b + 1) {
            Some(s) if s <= MAX_PACKED_DEGREE + 1 => s,
            _ => return Ok(Outcome::TooLarge(stride.saturating_mul(b + 1) - 1)),
        };
    }
    let plan = Plan { degree: stride - 1, vars, strides, bounds };
    debug_assert!(plan.bounds.iter().zip(&plan.strides).all(|(b, s)| b * s <= plan.degree));

    // ‖Res‖_∞ ≤ ‖f‖_1^{deg g} ‖g‖_1^{deg f}
    let bits = dg as u64 * one_norm_bits(fc) + df as u64 * one_norm_bits(gc) + 2;
    let count = (bits / 61 + 1) as usize;
    let candidates = primes(count + 4);

    let fp: Vec<Packed> = fc.iter().map(|c| plan.pack(c)).collect();
    let gp: Vec<Packed> = gc.iter().map(|c| plan.pack(c)).collect();
    let n = plan.degree;

    let images: Vec<Option<(u64, Vec<u64>)>> = candidates
        .par_iter()
        .map(|&p| {
            budget.check()?;
            Ok(image_mod(&fp, &gp, n, p).map(|r| (p, r)))
        })
        .collect::<Result<_, PolyError>>()?;
    let images: Vec<(u64, Vec<u64>)> = images.into_iter().flatten().collect();
    if images.len() < count {
        return Ok(Outcome::Declined);
    }
    let (ps, residues): (Vec<u64>, Vec<Vec<u64>>) = images.into_iter().take(count).unzip();

    // CRT with symmetric lift
    let mut moduli = Vec::with_capacity(ps.len());
    let mut m = BigInt::one();
    for &p in &ps {
        let inv = invmod(reduce(&m, p), p);
        moduli.push((m.clone(), inv));
        m *= p;
    }
    let half = &m >> 1;
    let coeffs: Vec<BigInt> = (0..=n)
        .into_par_iter()
        .map(|e| {
            let mut x = BigInt::zero();
            for (i, &p) in ps.iter().enumerate() {
                let r = residues[i][e];
                let (mi, inv) = &moduli[i];
                let t = mulmod(submod(r, reduce(&x, p), p), *inv, p);
                if t != 0 {
                    x += mi * t;
                }
            }
            if x > half {
                x -= &m;
            }
            x
        })
        .collect();
    let mut out = IntPoly::zero();
    for (e, c) in coeffs.into_iter().enumerate() {
        if !c.is_zero() {
            out.add_term(plan.unpack(e), c);
        }
    }
    Ok(Outcome::Done(out))
}

/// Values of the packed resultant modulo `p`, as coefficients of degree ≤ `n`.
fn image_mod(fp: &[Packed], gp: &[Packed], n: usize, p: u64) -> Option<Vec<u64>> {
    let red = |cs: &[Packed]| -> Vec<Vec<(usize, u64)>> {
        cs.iter().map(|c| c.iter().map(|(e, x)| (*e, reduce(x, p))).filter(|&(_, x)| x != 0).collect()).collect()
    };
    let fr = red(fp);
    let gr = red(gp);
    if fr.last().is_some_and(Vec::is_empty) || gr.last().is_some_and(Vec::is_empty) {
        return None;
    }
    let eval = |c: &[(usize, u64)], pw: &[u64]| c.iter().fold(0, |acc, &(e, x)| addmod(acc, mulmod(x, pw[e], p), p));
    // consecutive points offset+1 … offset+n+1, avoiding zeros of both leading coefficients
    let mut offset = 0u64;
    'outer: loop {
        let mut values = Vec::with_capacity(n + 1);
        let mut pw = vec![1u64; n + 1];
        for i in 0..=n as u64 {
            let x = (offset + i + 1) % p;
            for e in 1..=n {
                pw[e] = mulmod(pw[e - 1], x, p);
            }
            let a: Vec<u64> = fr.iter().map(|c| eval(c, &pw)).collect();
            let b: Vec<u64> = gr.iter().map(|c| eval(c, &pw)).collect();
            if *a.last().expect("nonempty") == 0 || *b.last().expect("nonempty") == 0 {
                offset += n as u64 + 7;
                continue 'outer;
            }
            values.push(univariate_resultant(a, b, p));
        }
        return Some(interpolate_consecutive(offset + 1, &values, p));
    }
}

/// Coefficients of the polynomial taking `values[i]` at `start + i`.
fn interpolate_consecutive(start: u64, values: &[u64], p: u64) -> Vec<u64> {
    let n = values.len();
    let mut inv = vec![0u64; n.max(2)];
    inv[1] = 1;
    for j in 2..n {
        inv[j] = mulmod(p - p / j as u64, inv[(p % j as u64) as usize], p);
    }
    let mut dd = values.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = mulmod(submod(dd[i], dd[i - 1], p), inv[j], p);
        }
    }
    // Newton form to monomial basis
    let mut poly = vec![0u64; n];
    for i in (0..n).rev() {
        let xi = (start + i as u64) % p;
        // poly = poly·(X − x_i) + dd[i]
        for k in (1..n).rev() {
            poly[k] = submod(poly[k - 1], mulmod(poly[k], xi, p), p);
        }
        poly[0] = submod(0, mulmod(poly[0], xi, p), p);
        poly[0] = addmod(poly[0], dd[i], p);
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_round_trip() {
        let p = primes(1)[0];
        let coeffs = [5u64, 0, 3, p - 1];
        let values: Vec<u64> = (0..4)
            .map(|i| {
                let x = 10 + i as u64;
                coeffs.iter().rev().fold(0, |acc, &c| addmod(mulmod(acc, x, p), c, p))
            })
            .collect();
        assert_eq!(interpolate_consecutive(10, &values, p), coeffs.to_vec());
    }

    #[test]
    fn small_univariate() {
        // Res(x² − 1, x − 2) = 3
        let p = 101;
        assert_eq!(univariate_resultant(vec![100, 0, 1], vec![99, 1], p), 3);
    }

    #[test]
    fn primes_are_distinct() {
        let ps = primes(5);
        assert!(ps.windows(2).all(|w| w[0] > w[1]));
    }
}
