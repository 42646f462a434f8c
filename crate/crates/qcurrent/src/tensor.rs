//! Operators and operator-valued states on tensor powers of C^dim.
//!
//! A [`Tensor`] is a sparse matrix indexed by packed multi-indices over
//! `legs` tensor factors, each of dimension `dim`.  The entry type is
//! generic: plain truncated series give ordinary operators, while
//! module-vector entries represent states such as `T1(u) T2(v) w`, which
//! carry both a matrix structure and a module payload.  The [`Entry`]
//! trait is the small interface the container needs from its entries.
//!
//! Multi-indices are packed big-endian: leg 0 is the most significant
//! digit.  All binary operations require matching `dim` and `legs`;
//! operators acting on fewer legs are first placed with [`Tensor::embed`].

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::marker::PhantomData;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{SeriesContext, TruncSeries};

/// Entry interface: closed under addition, scalable by a series, and
/// testable for zero so the container can stay sparse.
pub trait Entry<S: Scalar>: Clone + PartialEq + Debug + Send + Sync {
    fn add_assign_entry(&mut self, other: &Self);
    fn mul_series(&self, s: &TruncSeries<S>) -> Self;
    fn is_zero_entry(&self) -> bool;
}

impl<S: Scalar> Entry<S> for TruncSeries<S> {
    fn add_assign_entry(&mut self, other: &Self) {
        self.acc(other);
    }

    fn mul_series(&self, s: &TruncSeries<S>) -> Self {
        self.mul(s)
    }

    fn is_zero_entry(&self) -> bool {
        self.is_zero()
    }
}

/// Which side of the operand an operator's leg factor lands on in an
/// ordered product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub type MultiIndex = SmallVec<[u32; 6]>;

pub fn pack(idx: &[u32], dim: u32) -> u32 {
    idx.iter().fold(0, |acc, &i| {
        debug_assert!(i < dim);
        acc * dim + i
    })
}

pub fn unpack(mut packed: u32, dim: u32, legs: u32) -> MultiIndex {
    let mut out: MultiIndex = SmallVec::from_elem(0, legs as usize);
    for k in (0..legs as usize).rev() {
        out[k] = packed % dim;
        packed /= dim;
    }
    out
}

#[derive(Debug, Clone)]
pub struct Tensor<S: Scalar, E: Entry<S>> {
    dim: u32,
    legs: u32,
    entries: BTreeMap<(u32, u32), E>,
    _scalar: PhantomData<S>,
}

impl<S: Scalar, E: Entry<S>> Tensor<S, E> {
    pub fn zero(dim: u32, legs: u32) -> Self {
        assert!(dim >= 1 && legs >= 1);
        Tensor { dim, legs, entries: BTreeMap::new(), _scalar: PhantomData }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn legs(&self) -> u32 {
        self.legs
    }

    pub fn side(&self) -> u32 {
        self.dim.pow(self.legs)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &E)> {
        self.entries.iter()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: u32, col: u32) -> Option<&E> {
        self.entries.get(&(row, col))
    }

    pub fn push(&mut self, row: u32, col: u32, e: E) {
        if e.is_zero_entry() {
            return;
        }
        debug_assert!(row < self.side() && col < self.side());
        match self.entries.entry((row, col)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(e);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign_entry(&e);
                if o.get().is_zero_entry() {
                    o.remove();
                }
            }
        }
    }

    fn same_shape(&self, other: &Tensor<S, impl Entry<S>>) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.legs, other.legs, "leg count mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_shape(other);
        let mut out = self.clone();
        for ((r, c), e) in &other.entries {
            out.push(*r, *c, e.clone());
        }
        out
    }

    pub fn acc(&mut self, other: &Self) {
        self.same_shape(other);
        for ((r, c), e) in &other.entries {
            self.push(*r, *c, e.clone());
        }
    }

    /// Scales every entry by a series.
    pub fn scale(&self, s: &TruncSeries<S>) -> Self {
        let mut out = Self::zero(self.dim, self.legs);
        for ((r, c), e) in &self.entries {
            out.push(*r, *c, e.mul_series(s));
        }
        out
    }

    pub fn map<F: Fn(&E) -> E>(&self, f: F) -> Self {
        let mut out = Self::zero(self.dim, self.legs);
        for ((r, c), e) in &self.entries {
            out.push(*r, *c, f(e));
        }
        out
    }

    pub fn try_map<F: Fn(&E) -> Result<E>>(&self, f: F) -> Result<Self> {
        let mut out = Self::zero(self.dim, self.legs);
        for ((r, c), e) in &self.entries {
            out.push(*r, *c, f(e)?);
        }
        Ok(out)
    }

    /// Swaps row and column index on one leg.
    pub fn transpose_leg(&self, leg: u32) -> Self {
        assert!(leg < self.legs);
        let mut out = Self::zero(self.dim, self.legs);
        for ((r, c), e) in &self.entries {
            let mut ri = unpack(*r, self.dim, self.legs);
            let mut ci = unpack(*c, self.dim, self.legs);
            std::mem::swap(&mut ri[leg as usize], &mut ci[leg as usize]);
            out.push(pack(&ri, self.dim), pack(&ci, self.dim), e.clone());
        }
        out
    }

    /// Trace over one leg; the result has one leg fewer.
    pub fn partial_trace(&self, leg: u32) -> Self {
        assert!(leg < self.legs && self.legs >= 2);
        let mut out = Self::zero(self.dim, self.legs - 1);
        for ((r, c), e) in &self.entries {
            let ri = unpack(*r, self.dim, self.legs);
            let ci = unpack(*c, self.dim, self.legs);
            if ri[leg as usize] != ci[leg as usize] {
                continue;
            }
            let rr: MultiIndex = ri
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != leg as usize)
                .map(|(_, &x)| x)
                .collect();
            let cc: MultiIndex = ci
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != leg as usize)
                .map(|(_, &x)| x)
                .collect();
            out.push(pack(&rr, self.dim), pack(&cc, self.dim), e.clone());
        }
        out
    }

    /// Sum of diagonal entries (full trace down to a bare entry).
    pub fn full_trace(&self) -> Option<E> {
        let mut acc: Option<E> = None;
        for ((r, c), e) in &self.entries {
            if r == c {
                match &mut acc {
                    None => acc = Some(e.clone()),
                    Some(a) => a.add_assign_entry(e),
                }
            }
        }
        acc.filter(|a| !a.is_zero_entry())
    }
}

impl<S: Scalar, E: Entry<S> + Negate> Tensor<S, E> {
    pub fn neg(&self) -> Self {
        self.map(|e| e.negate())
    }

    /// `self - other` for entries that know how to negate themselves.
    pub fn minus(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

/// Entry-level negation, kept separate from [`Entry`] so the container's
/// core ops need only addition and series scaling.
pub trait Negate {
    fn negate(&self) -> Self;
}

impl<S: Scalar> Negate for TruncSeries<S> {
    fn negate(&self) -> Self {
        self.neg()
    }
}

impl<S: Scalar> Tensor<S, TruncSeries<S>> {
    pub fn identity(ctx: &Arc<SeriesContext>, dim: u32, legs: u32) -> Self {
        let mut out = Self::zero(dim, legs);
        for k in 0..dim.pow(legs) {
            out.push(k, k, TruncSeries::one(ctx));
        }
        out
    }

    /// `coeff * prod_k e_{i_k j_k}^{(leg_k)}`, identity on unlisted legs.
    /// Listed legs must be distinct.
    pub fn matrix_units(
        dim: u32,
        legs: u32,
        units: &[(u32, u32, u32)],
        coeff: TruncSeries<S>,
    ) -> Self {
        let mut out = Self::zero(dim, legs);
        if coeff.is_zero() {
            return out;
        }
        let listed: Vec<u32> = units.iter().map(|(l, _, _)| *l).collect();
        for w in units {
            assert!(w.0 < legs && w.1 < dim && w.2 < dim);
        }
        assert!(
            listed.iter().collect::<std::collections::BTreeSet<_>>().len() == listed.len(),
            "legs must be distinct"
        );
        let free: Vec<u32> = (0..legs).filter(|l| !listed.contains(l)).collect();
        let mut diag = vec![0u32; free.len()];
        loop {
            let mut r: MultiIndex = SmallVec::from_elem(0, legs as usize);
            let mut c: MultiIndex = SmallVec::from_elem(0, legs as usize);
            for (l, i, j) in units {
                r[*l as usize] = *i;
                c[*l as usize] = *j;
            }
            for (k, l) in free.iter().enumerate() {
                r[*l as usize] = diag[k];
                c[*l as usize] = diag[k];
            }
            out.push(pack(&r, dim), pack(&c, dim), coeff.clone());
            // advance the diagonal odometer
            let mut k = 0;
            loop {
                if k == diag.len() {
                    return out;
                }
                diag[k] += 1;
                if diag[k] < dim {
                    break;
                }
                diag[k] = 0;
                k += 1;
            }
        }
    }

    /// The operator permuting tensor factors by `sigma`:
    /// basis vector with column multi-index `c` maps to the row index `r`
    /// with `r[sigma[k]] = c[k]`.  For a transposition this is the usual
    /// flip `P = sum e_ij (x) e_ji`.
    pub fn permutation(ctx: &Arc<SeriesContext>, dim: u32, sigma: &[usize]) -> Self {
        let legs = sigma.len() as u32;
        let mut seen = vec![false; sigma.len()];
        for &s in sigma {
            assert!(s < sigma.len() && !seen[s], "not a permutation");
            seen[s] = true;
        }
        let mut out = Self::zero(dim, legs);
        for packed in 0..dim.pow(legs) {
            let c = unpack(packed, dim, legs);
            let mut r: MultiIndex = SmallVec::from_elem(0, legs as usize);
            for (k, &sk) in sigma.iter().enumerate() {
                r[sk] = c[k];
            }
            out.push(pack(&r, dim), packed, TruncSeries::one(ctx));
        }
        out
    }

    /// Places an operator acting on `self.legs` factors at positions `at`
    /// of a larger product, identity on the remaining legs.
    pub fn embed(&self, total_legs: u32, at: &[u32]) -> Self {
        assert_eq!(at.len(), self.legs as usize);
        let mut seen = vec![false; total_legs as usize];
        for &p in at {
            assert!(p < total_legs && !seen[p as usize], "bad embedding positions");
            seen[p as usize] = true;
        }
        let free: Vec<u32> = (0..total_legs).filter(|l| !at.contains(l)).collect();
        let mut out = Self::zero(self.dim, total_legs);
        for ((r, c), e) in &self.entries {
            let ri = unpack(*r, self.dim, self.legs);
            let ci = unpack(*c, self.dim, self.legs);
            let mut diag = vec![0u32; free.len()];
            'outer: loop {
                let mut rr: MultiIndex = SmallVec::from_elem(0, total_legs as usize);
                let mut cc: MultiIndex = SmallVec::from_elem(0, total_legs as usize);
                for (k, &p) in at.iter().enumerate() {
                    rr[p as usize] = ri[k];
                    cc[p as usize] = ci[k];
                }
                for (k, &l) in free.iter().enumerate() {
                    rr[l as usize] = diag[k];
                    cc[l as usize] = diag[k];
                }
                out.push(pack(&rr, self.dim), pack(&cc, self.dim), e.clone());
                let mut k = 0;
                loop {
                    if k == diag.len() {
                        break 'outer;
                    }
                    diag[k] += 1;
                    if diag[k] < self.dim {
                        break;
                    }
                    diag[k] = 0;
                    k += 1;
                }
            }
        }
        out
    }

    /// Matrix product `self . other`, the operator `self` acting after
    /// (to the left of) `other`.  Entry types of the operand are preserved:
    /// composing with a state-valued tensor scales its module entries.
    pub fn compose<E: Entry<S>>(&self, other: &Tensor<S, E>) -> Tensor<S, E> {
        self.same_shape(other);
        // index the operand by row to skip dead pairs
        let mut by_row: BTreeMap<u32, Vec<(u32, &E)>> = BTreeMap::new();
        for ((r, c), e) in &other.entries {
            by_row.entry(*r).or_default().push((*c, e));
        }
        let mut out = Tensor::zero(self.dim, self.legs);
        for ((ra, ca), s) in &self.entries {
            if let Some(row) = by_row.get(ca) {
                for (cb, e) in row {
                    out.push(*ra, *cb, e.mul_series(s));
                }
            }
        }
        out
    }

    /// Inverse of an operator congruent to the identity modulo `h`,
    /// computed as the geometric series of `id - self`.  Exact inside the
    /// truncation window because the defect gains one power of `h` per
    /// factor.
    pub fn neumann_inverse(&self, ctx: &Arc<SeriesContext>) -> Result<Self> {
        let id = Self::identity(ctx, self.dim, self.legs);
        let defect = id.minus(self);
        for (_, e) in defect.entries() {
            if let Some(v) = e.h_valuation() {
                if v < 1 {
                    return Err(Error::BadLeading(
                        "operator is not identity modulo h".into(),
                    ));
                }
            }
        }
        let mut inv = id.clone();
        let mut pow = id;
        for _ in 1..ctx.h_order() {
            pow = pow.compose(&defect);
            if pow.is_zero() {
                break;
            }
            inv.acc(&pow);
        }
        Ok(inv)
    }
}

impl<S: Scalar, E: Entry<S>> Tensor<S, E> {
    /// Matrix product `self . op` with a plain operator on the right.
    pub fn compose_right(&self, op: &Tensor<S, TruncSeries<S>>) -> Self {
        self.same_shape(op);
        let mut by_row: BTreeMap<u32, Vec<(u32, &TruncSeries<S>)>> = BTreeMap::new();
        for ((r, c), s) in op.entries() {
            by_row.entry(*r).or_default().push((*c, s));
        }
        let mut out = Self::zero(self.dim, self.legs);
        for ((ra, ca), e) in &self.entries {
            if let Some(row) = by_row.get(ca) {
                for (cb, s) in row {
                    out.push(*ra, *cb, e.mul_series(s));
                }
            }
        }
        out
    }
}

/// Product of an operator with an operand where each leg independently
/// chooses the side: on `Left` legs the operator's matrix factor stands to
/// the left of the operand's, on `Right` legs to the right.  Coefficients
/// always multiply with the operator's series on the left, which is the
/// only order that makes sense when the operand carries module states.
/// With all legs `Left` this is exactly [`Tensor::compose`].
pub fn ordered_mul<S: Scalar, E: Entry<S>>(
    op: &Tensor<S, TruncSeries<S>>,
    operand: &Tensor<S, E>,
    sides: &[Side],
) -> Tensor<S, E> {
    assert_eq!(op.dim(), operand.dim());
    assert_eq!(op.legs(), operand.legs());
    assert_eq!(sides.len(), op.legs() as usize);
    let dim = op.dim();
    let legs = op.legs();
    let mut out = Tensor::zero(dim, legs);
    for ((ra, ca), s) in op.entries() {
        let rai = unpack(*ra, dim, legs);
        let cai = unpack(*ca, dim, legs);
        for ((rb, cb), e) in operand.entries() {
            let rbi = unpack(*rb, dim, legs);
            let cbi = unpack(*cb, dim, legs);
            let mut row: MultiIndex = SmallVec::from_elem(0, legs as usize);
            let mut col: MultiIndex = SmallVec::from_elem(0, legs as usize);
            let mut alive = true;
            for l in 0..legs as usize {
                match sides[l] {
                    Side::Left => {
                        // e_{ra ca} e_{rb cb} = delta_{ca rb} e_{ra cb}
                        if cai[l] != rbi[l] {
                            alive = false;
                            break;
                        }
                        row[l] = rai[l];
                        col[l] = cbi[l];
                    }
                    Side::Right => {
                        // e_{rb cb} e_{ra ca} = delta_{cb ra} e_{rb ca}
                        if cbi[l] != rai[l] {
                            alive = false;
                            break;
                        }
                        row[l] = rbi[l];
                        col[l] = cai[l];
                    }
                }
            }
            if alive {
                out.push(pack(&row, dim), pack(&col, dim), e.mul_series(s));
            }
        }
    }
    out
}

impl<S: Scalar, E: Entry<S>> PartialEq for Tensor<S, E> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.legs == other.legs && self.entries == other.entries
    }
}

impl<S: Scalar, E: Entry<S> + std::fmt::Display> Tensor<S, E> {
    /// Human-readable location and values of the first differing entry.
    pub fn diff_report(&self, other: &Self) -> Option<String> {
        self.same_shape(other);
        let mut keys: Vec<&(u32, u32)> =
            self.entries.keys().chain(other.entries.keys()).collect();
        keys.sort();
        keys.dedup();
        for key in keys {
            let a = self.entries.get(key);
            let b = other.entries.get(key);
            if a != b {
                let ri = unpack(key.0, self.dim, self.legs);
                let ci = unpack(key.1, self.dim, self.legs);
                let fmt_e = |e: Option<&E>| match e {
                    None => "0".to_string(),
                    Some(x) => x.to_string(),
                };
                return Some(format!(
                    "entry row {ri:?} col {ci:?}:\n  left  = {}\n  right = {}",
                    fmt_e(a),
                    fmt_e(b)
                ));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{LinearForm, SeriesContext};
    use crate::Rat;

    type Ser = TruncSeries<Rat>;
    type Op = Tensor<Rat, Ser>;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::from_ratio(n, d)
    }

    fn ctx() -> Arc<SeriesContext> {
        SeriesContext::builder(3).laurent("u", -4, 2).build()
    }

    #[test]
    fn pack_unpack_roundtrip() {
        for packed in 0..27u32 {
            let idx = unpack(packed, 3, 3);
            assert_eq!(pack(&idx, 3), packed);
        }
        assert_eq!(pack(&[1, 2], 3), 5);
        assert_eq!(unpack(5, 3, 2).as_slice(), &[1, 2]);
    }

    #[test]
    fn permutation_is_flip() {
        let ctx = ctx();
        let p = Op::permutation(&ctx, 2, &[1, 0]);
        // P = e11(x)e11 + e12(x)e21 + e21(x)e12 + e22(x)e22 (1-based labels)
        let mut want = Op::zero(2, 2);
        for i in 0..2u32 {
            for j in 0..2u32 {
                let r = pack(&[j, i], 2);
                let c = pack(&[i, j], 2);
                want.push(r, c, Ser::one(&ctx));
            }
        }
        assert_eq!(p, want);
        // P^2 = 1
        assert_eq!(p.compose(&p), Op::identity(&ctx, 2, 2));
    }

    #[test]
    fn trace_of_flip_is_identity() {
        let ctx = ctx();
        let p = Op::permutation(&ctx, 3, &[1, 0]);
        assert_eq!(p.partial_trace(1), Op::identity(&ctx, 3, 1));
        assert_eq!(p.partial_trace(0), Op::identity(&ctx, 3, 1));
        // full trace of P over both legs is dim (= 3)
        let tr = p.partial_trace(1).full_trace().unwrap();
        assert_eq!(tr, Ser::constant(&ctx, rat(3, 1)));
    }

    #[test]
    fn matrix_unit_composition() {
        let ctx = ctx();
        // e_01 . e_10 = e_00 on a single leg
        let a = Op::matrix_units(2, 1, &[(0, 0, 1)], Ser::one(&ctx));
        let b = Op::matrix_units(2, 1, &[(0, 1, 0)], Ser::one(&ctx));
        let want = Op::matrix_units(2, 1, &[(0, 0, 0)], Ser::one(&ctx));
        assert_eq!(a.compose(&b), want);
        // and the reverse order gives e_11
        let want2 = Op::matrix_units(2, 1, &[(0, 1, 1)], Ser::one(&ctx));
        assert_eq!(b.compose(&a), want2);
    }

    #[test]
    fn embed_keeps_identity() {
        let ctx = ctx();
        let id1 = Op::identity(&ctx, 3, 1);
        assert_eq!(id1.embed(3, &[1]), Op::identity(&ctx, 3, 3));
        // embedding a flip at (0,2) of three legs then squaring is identity
        let p = Op::permutation(&ctx, 2, &[1, 0]).embed(3, &[0, 2]);
        assert_eq!(p.compose(&p), Op::identity(&ctx, 2, 3));
    }

    #[test]
    fn embed_transposed_positions_is_conjugated_flip() {
        let ctx = ctx();
        // Placing a 2-leg operator at positions [1,0] equals conjugating the
        // [0,1] placement by the flip.
        let r = Op::matrix_units(2, 2, &[(0, 0, 1), (1, 1, 0)], Ser::one(&ctx));
        let direct = r.embed(2, &[1, 0]);
        let p = Op::permutation(&ctx, 2, &[1, 0]);
        let conj = p.compose(&r).compose(&p);
        assert_eq!(direct, conj);
    }

    #[test]
    fn transpose_leg_moves_units() {
        let ctx = ctx();
        let a = Op::matrix_units(2, 2, &[(0, 0, 1)], Ser::one(&ctx));
        let want = Op::matrix_units(2, 2, &[(0, 1, 0)], Ser::one(&ctx));
        assert_eq!(a.transpose_leg(0), want);
        assert_eq!(a.transpose_leg(1), a);
    }

    #[test]
    fn neumann_inverse_of_yang_type_operator() {
        let ctx = ctx();
        // A = 1 - h P u^{-1}: invertible mod h with exact windowed inverse.
        let huinv = Ser::monomial(&ctx, 1, &[-1], rat(-1, 1));
        let p = Op::permutation(&ctx, 2, &[1, 0]);
        let a = Op::identity(&ctx, 2, 2).add(&p.scale(&huinv));
        let inv = a.neumann_inverse(&ctx).unwrap();
        assert_eq!(a.compose(&inv), Op::identity(&ctx, 2, 2));
        assert_eq!(inv.compose(&a), Op::identity(&ctx, 2, 2));
    }

    #[test]
    fn neumann_rejects_non_unipotent() {
        let ctx = ctx();
        let p = Op::permutation(&ctx, 2, &[1, 0]);
        assert!(p.neumann_inverse(&ctx).is_err());
    }

    #[test]
    fn ordered_mul_all_left_is_compose() {
        let ctx = ctx();
        let u = Ser::monomial(&ctx, 0, &[-1], rat(2, 1));
        let a = Op::permutation(&ctx, 2, &[1, 0]).scale(&u);
        let b = Op::matrix_units(2, 2, &[(0, 0, 1), (1, 1, 1)], Ser::one(&ctx));
        let left = ordered_mul(&a, &b, &[Side::Left, Side::Left]);
        assert_eq!(left, a.compose(&b));
    }

    #[test]
    fn ordered_mul_right_leg_flips_order() {
        let ctx = ctx();
        // op = e_01 on the only leg, operand = e_10.
        let a = Op::matrix_units(2, 1, &[(0, 0, 1)], Ser::one(&ctx));
        let b = Op::matrix_units(2, 1, &[(0, 1, 0)], Ser::one(&ctx));
        let l = ordered_mul(&a, &b, &[Side::Left]);
        let r = ordered_mul(&a, &b, &[Side::Right]);
        assert_eq!(l, Op::matrix_units(2, 1, &[(0, 0, 0)], Ser::one(&ctx)));
        assert_eq!(r, Op::matrix_units(2, 1, &[(0, 1, 1)], Ser::one(&ctx)));
    }

    #[test]
    fn compose_respects_series_coefficients() {
        let ctx = ctx();
        let f = LinearForm::var(&ctx, "u");
        let useries = f.to_series(&ctx);
        let a = Op::identity(&ctx, 2, 1).scale(&useries);
        let b = Op::identity(&ctx, 2, 1).scale(&useries);
        let prod = a.compose(&b);
        let want = Op::identity(&ctx, 2, 1).scale(&useries.mul(&useries));
        assert_eq!(prod, want);
    }
}
