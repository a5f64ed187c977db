//! PBW arithmetic in the enveloping algebra of the centralizer: normal-form
//! multiplication, the Kazhdan filtration, reduction modulo the left ideal
//! I_{λ,μ}, the adjoint action of 𝔫, and the invariance test.

use crate::centralizer::{bracket_elt, CentElt, GenIndex, GradedData};
use crate::error::{Error, Result};
use crate::scalar::Q;
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// An element of U(𝔞) in PBW normal form: a rational combination of
/// monomials, each a weakly increasing word in the module-wide basis order
/// (𝔭 generators first, 𝔫 generators last).
#[derive(Clone, PartialEq, Eq)]
pub struct UEAElement {
    ctx_id: u64,
    terms: BTreeMap<Vec<GenIndex>, Q>,
}

impl UEAElement {
    pub fn zero(data: &GradedData) -> Self {
        UEAElement {
            ctx_id: data.ctx_id(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(data: &GradedData, c: Q) -> Self {
        let mut out = Self::zero(data);
        out.add_term(Vec::new(), c);
        out
    }

    pub fn one(data: &GradedData) -> Self {
        Self::scalar(data, Q::one())
    }

    pub fn gen(data: &GradedData, idx: GenIndex) -> Self {
        debug_assert!(data.position(idx).is_ok());
        let mut out = Self::zero(data);
        out.add_term(vec![idx], Q::one());
        out
    }

    /// Degree-one embedding of a centralizer element.
    pub fn from_cent(data: &GradedData, x: &CentElt) -> Self {
        let mut out = Self::zero(data);
        for (&idx, c) in x.terms() {
            out.add_term(vec![idx], c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<GenIndex>, &Q)> {
        self.terms.iter()
    }

    fn add_term(&mut self, mono: Vec<GenIndex>, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    fn check_ctx(&self, other: &UEAElement) -> Result<()> {
        if self.ctx_id != other.ctx_id {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &UEAElement) -> Result<UEAElement> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &UEAElement) -> Result<UEAElement> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> UEAElement {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> UEAElement {
        let mut out = UEAElement {
            ctx_id: self.ctx_id,
            terms: BTreeMap::new(),
        };
        if !c.is_zero() {
            for (mono, v) in &self.terms {
                out.terms.insert(mono.clone(), v * c);
            }
        }
        out
    }

    /// PBW normal-form product.
    pub fn mul(&self, data: &GradedData, other: &UEAElement) -> Result<UEAElement> {
        self.check_ctx(other)?;
        if self.ctx_id != data.ctx_id() {
            return Err(Error::ContextMismatch);
        }
        let mut out = UEAElement::zero(data);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut word: Vec<GenIndex> = m1.clone();
                word.extend_from_slice(m2);
                straighten(data, word, c1 * c2, &mut out);
            }
        }
        Ok(out)
    }

    /// Kazhdan degree of the element: max over monomials of
    /// Σ (1 − deg_μ(factor)); the scalar monomial has degree 0.
    pub fn kazhdan_degree(&self, data: &GradedData) -> Option<i64> {
        self.terms
            .keys()
            .map(|m| mono_kazhdan(data, m))
            .max()
    }

    /// The top Kazhdan layer and the degree-one component inside it.
    pub fn gr_linear_part(&self, data: &GradedData) -> Result<(i64, CentElt)> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        let top = self.kazhdan_degree(data).unwrap();
        let mut lin = CentElt::zero();
        for (mono, c) in &self.terms {
            if mono.len() == 1 && mono_kazhdan(data, mono) == top {
                lin.add_term(mono[0], c.clone());
            }
        }
        Ok((top, lin))
    }
}

fn mono_kazhdan(data: &GradedData, mono: &[GenIndex]) -> i64 {
    mono.iter().map(|&g| 1 - data.deg_mu(g)).sum()
}

/// Straightens `word * c` into PBW normal form, accumulating into `out`.
///
/// Adjacent out-of-order pairs are rewritten with x y = y x + [x, y] until
/// every word is weakly increasing; termination follows from the
/// (length, inversion-count) measure.
fn straighten(data: &GradedData, word: Vec<GenIndex>, c: Q, out: &mut UEAElement) {
    let mut stack = vec![(word, c)];
    while let Some((word, c)) = stack.pop() {
        if c.is_zero() {
            continue;
        }
        let mut inversion = None;
        for i in 0..word.len().saturating_sub(1) {
            let pa = data.position(word[i]).expect("basis index");
            let pb = data.position(word[i + 1]).expect("basis index");
            if pa > pb {
                inversion = Some(i);
                break;
            }
        }
        match inversion {
            None => out.add_term(word, c),
            Some(i) => {
                let mut swapped = word.clone();
                swapped.swap(i, i + 1);
                let br = crate::centralizer::bracket(data.lambda(), word[i], word[i + 1]);
                stack.push((swapped, c.clone()));
                for (&idx, bc) in br.terms() {
                    let mut shorter = Vec::with_capacity(word.len() - 1);
                    shorter.extend_from_slice(&word[..i]);
                    shorter.push(idx);
                    shorter.extend_from_slice(&word[i + 2..]);
                    stack.push((shorter, &c * bc));
                }
            }
        }
    }
}

/// Adjoint action of a centralizer element, extended by the Leibniz rule.
pub fn ad_action(data: &GradedData, n: &CentElt, x: &UEAElement) -> UEAElement {
    let mut out = UEAElement::zero(data);
    for (mono, c) in x.terms() {
        for i in 0..mono.len() {
            let br = bracket_elt(data.lambda(), n, &CentElt::gen(mono[i]));
            for (&idx, bc) in br.terms() {
                let mut word = Vec::with_capacity(mono.len());
                word.extend_from_slice(&mono[..i]);
                word.push(idx);
                word.extend_from_slice(&mono[i + 1..]);
                straighten(data, word, c * bc, &mut out);
            }
        }
    }
    out
}

/// The canonical representative of x + I_{λ,μ} supported on 𝔭-monomials:
/// every trailing 𝔫 factor 𝗇 is replaced by the scalar −χ(𝗇).
pub fn reduce_mod_ideal(data: &GradedData, x: &UEAElement) -> UEAElement {
    let mut out = UEAElement::zero(data);
    for (mono, c) in x.terms() {
        let split = mono
            .iter()
            .position(|&g| data.in_n(g))
            .unwrap_or(mono.len());
        let mut coeff = c.clone();
        for &g in &mono[split..] {
            debug_assert!(data.in_n(g));
            coeff *= -data.chi().coeff(g);
            if coeff.is_zero() {
                break;
            }
        }
        out.add_term(mono[..split].to_vec(), coeff);
    }
    out
}

/// Checks 𝔫-invariance modulo the ideal. On failure, reports the first
/// offending basis element of 𝔫 together with the nonzero residue.
pub fn is_invariant(data: &GradedData, x: &UEAElement) -> (bool, Option<(GenIndex, UEAElement)>) {
    for &n in data.n_basis() {
        let moved = ad_action(data, &CentElt::gen(n), x);
        let residue = reduce_mod_ideal(data, &moved);
        if !residue.is_zero() {
            return (false, Some((n, residue)));
        }
    }
    (true, None)
}

impl fmt::Display for UEAElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, c) in &self.terms {
            if mono.is_empty() {
                // pure scalar term
                let neg = num::Signed::is_negative(c);
                if neg {
                    write!(f, "-")?;
                } else if !first {
                    write!(f, "+")?;
                }
                write!(f, "{}", num::Signed::abs(c))?;
            } else {
                crate::text::write_coeff_prefix(f, c, first)?;
                let words: Vec<String> = mono.iter().map(|g| g.to_string()).collect();
                write!(f, "{}", words.join(" "))?;
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for UEAElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centralizer::graded_data;
    use crate::pyramid::Pyramid;
    use crate::scalar::qi;

    fn ctx(lp: &[i64], mp: &[i64]) -> GradedData {
        graded_data(&Pyramid::build(lp).unwrap(), &Pyramid::build(mp).unwrap()).unwrap()
    }

    #[test]
    fn unit_law_and_gl2_commutator() {
        let data = ctx(&[1, 1], &[2]);
        let e11 = UEAElement::gen(&data, GenIndex::new(1, 1, 0));
        let one = UEAElement::one(&data);
        assert_eq!(e11.mul(&data, &one).unwrap(), e11);
        assert_eq!(one.mul(&data, &e11).unwrap(), e11);

        let e12 = UEAElement::gen(&data, GenIndex::new(1, 2, 0));
        let e21 = UEAElement::gen(&data, GenIndex::new(2, 1, 0));
        let comm = e12
            .mul(&data, &e21)
            .unwrap()
            .sub(&e21.mul(&data, &e12).unwrap())
            .unwrap();
        let e22 = UEAElement::gen(&data, GenIndex::new(2, 2, 0));
        assert_eq!(comm, e11.sub(&e22).unwrap());
    }

    #[test]
    fn commutators_match_brackets_everywhere() {
        for (lp, mp) in [
            (vec![1, 2], vec![2]),
            (vec![2, 2], vec![2]),
            (vec![1, 1, 2], vec![1, 2]),
        ] {
            let data = ctx(&lp, &mp);
            for &a in data.basis() {
                for &b in data.basis() {
                    let xa = UEAElement::gen(&data, a);
                    let xb = UEAElement::gen(&data, b);
                    let comm = xa
                        .mul(&data, &xb)
                        .unwrap()
                        .sub(&xb.mul(&data, &xa).unwrap())
                        .unwrap();
                    let br = crate::centralizer::bracket(data.lambda(), a, b);
                    assert_eq!(comm, UEAElement::from_cent(&data, &br));
                }
            }
        }
    }

    #[test]
    fn associativity_exhaustive_low_degree() {
        let data = ctx(&[1, 2], &[2]);
        // all monomials of length <= 2 in the 5-dimensional basis
        let mut monos: Vec<UEAElement> = vec![UEAElement::one(&data)];
        for &a in data.basis() {
            monos.push(UEAElement::gen(&data, a));
        }
        let gens: Vec<UEAElement> = data
            .basis()
            .iter()
            .map(|&a| UEAElement::gen(&data, a))
            .collect();
        for x in &gens {
            for y in &gens {
                monos.push(x.mul(&data, y).unwrap());
            }
        }
        for x in &monos {
            for y in &gens {
                for z in &gens {
                    let xy_z = x.mul(&data, y).unwrap().mul(&data, z).unwrap();
                    let x_yz = x.mul(&data, &y.mul(&data, z).unwrap()).unwrap();
                    assert_eq!(xy_z, x_yz);
                }
            }
        }
    }

    #[test]
    fn kazhdan_degrees_add_under_multiplication() {
        let data = ctx(&[2, 2], &[2]);
        for &a in data.basis() {
            for &b in data.basis() {
                let xa = UEAElement::gen(&data, a);
                let xb = UEAElement::gen(&data, b);
                let prod = xa.mul(&data, &xb).unwrap();
                let da = xa.kazhdan_degree(&data).unwrap();
                let db = xb.kazhdan_degree(&data).unwrap();
                assert!(prod.kazhdan_degree(&data).unwrap() <= da + db);
                // the top layer is exactly the concatenated monomial
                let (top, _) = prod.gr_linear_part(&data).unwrap();
                assert_eq!(top, da + db);
            }
        }
    }

    #[test]
    fn reduce_examples() {
        // chi-supported generator reduces to -1
        let data = ctx(&[1, 1, 2, 2], &[1, 1, 2]);
        let chi_gen = UEAElement::gen(&data, GenIndex::new(3, 4, 1));
        assert_eq!(
            reduce_mod_ideal(&data, &chi_gen),
            UEAElement::scalar(&data, qi(-1))
        );

        // degenerate mu: reduction is the identity
        let dataid = ctx(&[1, 1, 2, 2], &[1, 1, 1, 1]);
        for &a in dataid.basis() {
            let x = UEAElement::gen(&dataid, a);
            assert_eq!(reduce_mod_ideal(&dataid, &x), x);
        }

        // p * n with chi(n) = 0 reduces to 0
        let p = UEAElement::gen(&data, GenIndex::new(1, 1, 0));
        let n0 = UEAElement::gen(&data, GenIndex::new(3, 4, 0));
        let prod = p.mul(&data, &n0).unwrap();
        assert!(reduce_mod_ideal(&data, &prod).is_zero());

        // idempotent
        let mixed = chi_gen.mul(&data, &p).unwrap();
        let r1 = reduce_mod_ideal(&data, &mixed);
        assert_eq!(reduce_mod_ideal(&data, &r1), r1);
    }

    #[test]
    fn ideal_membership_reduces_to_zero() {
        // reduce(x * (n + chi(n))) = 0 for all basis x and n in n
        let data = ctx(&[1, 1, 2, 2], &[1, 1, 2]);
        for &nidx in data.n_basis() {
            let gen_plus_chi = UEAElement::gen(&data, nidx)
                .add(&UEAElement::scalar(&data, data.chi().coeff(nidx)))
                .unwrap();
            for &xidx in data.basis() {
                let x = UEAElement::gen(&data, xidx);
                let prod = x.mul(&data, &gen_plus_chi).unwrap();
                assert!(reduce_mod_ideal(&data, &prod).is_zero());
            }
        }
    }

    #[test]
    fn ad_action_leibniz_and_unit() {
        let data = ctx(&[1, 1, 2, 2], &[1, 1, 2]);
        let n = CentElt::gen(GenIndex::new(3, 4, 0));
        assert!(ad_action(&data, &n, &UEAElement::one(&data)).is_zero());
        // Leibniz on sampled pairs
        let xs: Vec<UEAElement> = data
            .basis()
            .iter()
            .take(8)
            .map(|&a| UEAElement::gen(&data, a))
            .collect();
        for x in &xs {
            for y in &xs {
                let xy = x.mul(&data, y).unwrap();
                let lhs = ad_action(&data, &n, &xy);
                let rhs = ad_action(&data, &n, x)
                    .mul(&data, y)
                    .unwrap()
                    .add(&x.mul(&data, &ad_action(&data, &n, y)).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn invariance_examples() {
        let data = ctx(&[1, 1, 2, 2], &[1, 1, 2]);
        let (ok, _) = is_invariant(&data, &UEAElement::one(&data));
        assert!(ok);

        // a known weight-2 generator is invariant
        let w2 = crate::text::parse_uea(&data, "E[4,1,0] + E[3,1,0] E[4,4,1]").unwrap();
        let (ok, witness) = is_invariant(&data, &w2);
        assert!(ok, "residue: {:?}", witness);

        // its leading term alone is not; E[3,4,1] is NOT a witness
        // ([E_34^(1), E_41^(0)] = E_31^(1) falls outside S^e), but both
        // E[1,4,1] and E[3,4,0] are, and the basis order reports the former
        let bare = UEAElement::gen(&data, GenIndex::new(4, 1, 0));
        let (ok, witness) = is_invariant(&data, &bare);
        assert!(!ok);
        let (n, residue) = witness.unwrap();
        assert_eq!(n, GenIndex::new(1, 4, 1));
        assert_eq!(
            residue,
            UEAElement::gen(&data, GenIndex::new(4, 4, 1)).neg()
        );
        let moved = ad_action(&data, &CentElt::gen(GenIndex::new(3, 4, 0)), &bare);
        assert_eq!(
            reduce_mod_ideal(&data, &moved),
            UEAElement::gen(&data, GenIndex::new(3, 1, 0))
        );
        let dead = ad_action(&data, &CentElt::gen(GenIndex::new(3, 4, 1)), &bare);
        assert!(dead.is_zero());
    }

    #[test]
    fn invariance_is_well_defined_on_the_quotient() {
        // adding an ideal element never changes the verdict or the residues
        let data = ctx(&[1, 1, 2, 2], &[1, 1, 2]);
        let x = crate::text::parse_uea(&data, "E[4,1,0] + E[3,1,0] E[4,4,1]").unwrap();
        let y = UEAElement::gen(&data, GenIndex::new(4, 1, 0));
        let nidx = GenIndex::new(3, 4, 1);
        let ideal_elt = UEAElement::gen(&data, GenIndex::new(1, 1, 0))
            .mul(
                &data,
                &UEAElement::gen(&data, nidx)
                    .add(&UEAElement::scalar(&data, data.chi().coeff(nidx)))
                    .unwrap(),
            )
            .unwrap();
        assert!(reduce_mod_ideal(&data, &ideal_elt).is_zero());
        for z in [&x, &y] {
            let shifted = z.add(&ideal_elt).unwrap();
            let (ok1, w1) = is_invariant(&data, z);
            let (ok2, w2) = is_invariant(&data, &shifted);
            assert_eq!(ok1, ok2);
            assert_eq!(w1, w2);
        }
    }

    #[test]
    fn invariants_form_an_algebra() {
        let data = ctx(&[1, 1, 2, 2], &[1, 1, 2]);
        let g1 = crate::text::parse_uea(&data, "E[4,1,0] + E[3,1,0] E[4,4,1]").unwrap();
        let g2 = crate::text::parse_uea(&data, "E[1,1,0]").unwrap();
        let g3 = crate::text::parse_uea(&data, "E[4,2,0] + E[3,2,0] E[4,4,1]").unwrap();
        for x in [&g1, &g2, &g3] {
            assert!(is_invariant(&data, x).0);
            for y in [&g1, &g2, &g3] {
                let xy = x.mul(&data, y).unwrap();
                assert!(is_invariant(&data, &xy).0, "product left the algebra");
            }
        }
    }

    #[test]
    fn gr_linear_part_examples() {
        let data = ctx(&[1, 1, 2, 2], &[1, 1, 2]);
        let w2 = crate::text::parse_uea(&data, "E[4,1,0] + E[3,1,0] E[4,4,1]").unwrap();
        let (deg, lin) = w2.gr_linear_part(&data).unwrap();
        assert_eq!(deg, 2);
        assert_eq!(lin, CentElt::gen(GenIndex::new(4, 1, 0)));

        for &a in data.basis() {
            let x = UEAElement::gen(&data, a);
            let (deg, lin) = x.gr_linear_part(&data).unwrap();
            assert_eq!(deg, 1 - data.deg_mu(a));
            assert_eq!(lin, CentElt::gen(a));
        }

        assert_eq!(
            UEAElement::zero(&data).gr_linear_part(&data),
            Err(Error::ZeroElement)
        );
    }

    #[test]
    fn context_mismatch_is_detected() {
        let d1 = ctx(&[1, 1], &[2]);
        let d2 = ctx(&[1, 1], &[1, 1]);
        let x = UEAElement::gen(&d1, GenIndex::new(1, 1, 0));
        let y = UEAElement::gen(&d2, GenIndex::new(1, 1, 0));
        assert_eq!(x.mul(&d1, &y), Err(Error::ContextMismatch));
    }
}
