//! Linear algebra over `Z/p^k` via the Howell normal form.
//!
//! `Z/p^k` is not a domain, so row echelon form is not canonical and does not
//! describe row spans. The Howell form does: pivots are powers of `p`, entries
//! above a pivot `p^e` lie in `[0, p^e)`, and for every pivot row the span of
//! the rows below it contains every span element vanishing up to its pivot.

use serde::Serialize;

use crate::padic::{mulmod, pow_u64, submod, valuation_u64};

/// Dense matrix with entries reduced modulo `p^k`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ZpkMatrix {
    p: u64,
    k: u32,
    cols: usize,
    rows: Vec<Vec<u64>>,
}

impl ZpkMatrix {
    /// Entries are given as integers and reduced modulo `p^k`.
    pub fn new(p: u64, k: u32, cols: usize, rows: Vec<Vec<i128>>) -> Self {
        let q = pow_u64(p, k) as i128;
        let rows = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged matrix");
                r.into_iter().map(|x| x.rem_euclid(q) as u64).collect()
            })
            .collect();
        ZpkMatrix { p, k, cols, rows }
    }

    pub fn from_residues(p: u64, k: u32, cols: usize, rows: Vec<Vec<u64>>) -> Self {
        let q = pow_u64(p, k);
        let rows = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged matrix");
                r.into_iter().map(|x| x % q).collect()
            })
            .collect();
        ZpkMatrix { p, k, cols, rows }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        pow_u64(self.p, self.k)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        let q = self.modulus();
        self.rows
            .iter()
            .map(|r| {
                r.iter().zip(v).fold(0u64, |acc, (&a, &b)| ((acc as u128 + mulmod(a, b, q) as u128) % q as u128) as u64)
            })
            .collect()
    }

    pub fn transpose(&self) -> ZpkMatrix {
        let rows = (0..self.cols).map(|j| self.rows.iter().map(|r| r[j]).collect()).collect();
        ZpkMatrix { p: self.p, k: self.k, cols: self.rows.len(), rows }
    }
}

fn inv_unit(a: u64, q: u64) -> u64 {
    let (mut r0, mut r1) = (q as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let t = r0 / r1;
        (r0, r1) = (r1, r0 - t * r1);
        (s0, s1) = (s1, s0 - t * s1);
    }
    debug_assert_eq!(r0, 1, "not a unit");
    s0.rem_euclid(q as i128) as u64
}

fn axpy(row: &mut [u64], f: u64, pivot_row: &[u64], q: u64) {
    if f == 0 {
        return;
    }
    for (x, &y) in row.iter_mut().zip(pivot_row) {
        *x = submod(*x, mulmod(f, y, q), q);
    }
}

/// Howell normal form of the row span, zero rows removed.
///
/// Pivot choice is deterministic: the leftmost column with a nonzero entry,
/// then minimal valuation, then smallest residue, then lowest row index.
// trace: howell_form | linear algebra over Z/p^k | howell_form_is_canonical | exact mod p^k
pub fn howell_form(m: &ZpkMatrix) -> ZpkMatrix {
    let (p, k) = (m.p, m.k);
    let q = m.modulus();
    let mut rows: Vec<Vec<u64>> = m.rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    let mut pivots: Vec<(usize, u32)> = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        let best =
            (r..rows.len()).filter(|&i| rows[i][c] != 0).min_by_key(|&i| (valuation_u64(rows[i][c], p), rows[i][c], i));
        let Some(i) = best else { continue };
        rows.swap(r, i);
        let e = valuation_u64(rows[r][c], p);
        let pe = pow_u64(p, e);
        let u = inv_unit(rows[r][c] / pe, q);
        for x in rows[r].iter_mut() {
            *x = mulmod(*x, u, q);
        }
        let pivot_row = rows[r].clone();
        for row in rows.iter_mut().skip(r + 1) {
            let f = row[c] / pe;
            axpy(row, f, &pivot_row, q);
        }
        if e > 0 {
            // p^(k-e) times the pivot row vanishes at c; keep it in the span below.
            let s: Vec<u64> = pivot_row.iter().map(|&x| mulmod(x, pow_u64(p, k - e), q)).collect();
            if s.iter().any(|&x| x != 0) {
                rows.push(s);
            }
        }
        pivots.push((c, e));
        r += 1;
    }
    rows.truncate(r);
    for (ri, &(c, e)) in pivots.iter().enumerate() {
        let pe = pow_u64(p, e);
        let pivot_row = rows[ri].clone();
        for row in rows.iter_mut().take(ri) {
            let f = row[c] / pe;
            axpy(row, f, &pivot_row, q);
        }
    }
    ZpkMatrix { p, k, cols: m.cols, rows }
}

/// A kernel generator `v` together with the smallest `e` with `p^e v = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelGenerator {
    pub vector: Vec<u64>,
    pub annihilator_exponent: u32,
    /// `k - v_p(pivot)`; the kernel has `p^(sum of these)` elements.
    pub order_exponent: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionSpace {
    pub howell: ZpkMatrix,
    pub kernel: Vec<KernelGenerator>,
    /// `None` when the right-hand side is absent or not in the column span.
    pub particular: Option<Vec<u64>>,
    pub consistent: bool,
}

impl SolutionSpace {
    /// `log_p` of the number of kernel elements.
    pub fn kernel_log_size(&self) -> u32 {
        self.kernel.iter().map(|g| g.order_exponent).sum()
    }
}

fn first_nonzero(row: &[u64]) -> Option<usize> {
    row.iter().position(|&x| x != 0)
}

/// Solves `M x = rhs` over `Z/p^k`: the Howell form of `M`, generators of
/// the kernel in canonical form, and a particular solution if one exists.
///
/// The kernel is read off the Howell form of `[M^T | I]`; the particular
/// solution from that of `[M^T | 0 | I]` with the extra row `(-rhs, 1, 0)`.
// trace: solve_linear_zpk | linear algebra over Z/p^k | kernel_matches_brute_force_over_z9 | exact mod p^k
pub fn solve_linear_zpk(m: &ZpkMatrix, rhs: Option<&[u64]>) -> SolutionSpace {
    let (p, k) = (m.p, m.k);
    let q = m.modulus();
    let (nr, nc) = (m.nrows(), m.ncols());
    let mt = m.transpose();

    let aug: Vec<Vec<u64>> = (0..nc)
        .map(|j| {
            let mut row = mt.rows[j].clone();
            row.extend((0..nc).map(|i| u64::from(i == j)));
            row
        })
        .collect();
    let h = howell_form(&ZpkMatrix { p, k, cols: nr + nc, rows: aug });
    let kernel = h
        .rows
        .iter()
        .filter(|row| row[..nr].iter().all(|&x| x == 0))
        .map(|row| {
            let v = row[nr..].to_vec();
            let lead = v[first_nonzero(&v).expect("Howell rows are nonzero")];
            let min_val = v.iter().filter(|&&x| x != 0).map(|&x| valuation_u64(x, p)).min().unwrap();
            KernelGenerator { vector: v, annihilator_exponent: k - min_val, order_exponent: k - valuation_u64(lead, p) }
        })
        .collect();

    let particular = rhs.and_then(|b| {
        assert_eq!(b.len(), nr, "rhs length");
        let mut rows: Vec<Vec<u64>> = (0..nc)
            .map(|j| {
                let mut row = mt.rows[j].clone();
                row.push(0);
                row.extend((0..nc).map(|i| u64::from(i == j)));
                row
            })
            .collect();
        let mut extra: Vec<u64> = b.iter().map(|&x| (q - x % q) % q).collect();
        extra.push(1);
        extra.extend(std::iter::repeat_n(0, nc));
        rows.push(extra);
        let h = howell_form(&ZpkMatrix { p, k, cols: nr + 1 + nc, rows });
        h.rows
            .iter()
            .find(|row| first_nonzero(row) == Some(nr))
            .filter(|row| row[nr] == 1)
            .map(|row| row[nr + 1..].to_vec())
    });

    SolutionSpace { howell: howell_form(m), kernel, consistent: rhs.is_none() || particular.is_some(), particular }
}
