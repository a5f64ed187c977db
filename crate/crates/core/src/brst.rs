//! The BRST complexes attached to (λ, μ): the full complex C^k (currents and
//! ghost pairs) with its element d and differential Q = d_(0), the reduced
//! complex C̃^k (building blocks J_𝔭 and φ^{𝔫*}) with the table-driven
//! differential Q̃, the minimal-case affine generator family, generating-set
//! validation, and the conformal-vector search.

use crate::centralizer::{bilinear_form, CentElt, DualElt, GenIndex, GradedData};
use crate::error::{Error, Result};
use crate::finite_w::{assemble_report, minimal_b1, minimal_b2, CandidateReport, GenSetReport};
use crate::scalar::{q, qi, KPoly, Q};
use crate::vertex::{BracketTable, Factor, GenKind, LambdaPoly, TableBuilder, VGen, VState};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Both complexes of a pair (λ, μ): generator tables, the element d in the
/// full complex, and the precomputed action of Q̃ on the reduced generators.
pub struct ComplexContext {
    data: GradedData,
    full: BracketTable,
    reduced: BracketTable,
    full_current: BTreeMap<GenIndex, u32>,
    full_ghost: BTreeMap<GenIndex, u32>,
    full_gstar: BTreeMap<GenIndex, u32>,
    red_block: BTreeMap<GenIndex, u32>,
    red_gstar: BTreeMap<GenIndex, u32>,
    d: VState,
    q_reduced_on_gen: Vec<VState>,
}

/// Builds both bracket tables and the element
/// d = Σ_I :φ^I E_I: + φ^χ + ½ Σ_{I,I'} :φ^I φ^{I'} φ_{[E_{I'},E_I]}:.
pub fn build_context(data: &GradedData) -> Result<ComplexContext> {
    let lambda = data.lambda();

    // ---- full complex ----
    let mut fb = TableBuilder::new();
    let mut full_current = BTreeMap::new();
    let mut full_ghost = BTreeMap::new();
    let mut full_gstar = BTreeMap::new();
    for &idx in data.basis() {
        let g = fb.add_gen(VGen {
            kind: GenKind::Current(idx),
            odd: false,
            weight: 1 - data.deg_mu(idx),
        });
        full_current.insert(idx, g);
    }
    for &idx in data.n_basis() {
        let g = fb.add_gen(VGen {
            kind: GenKind::Ghost(idx),
            odd: true,
            weight: 1 - data.deg_mu(idx),
        });
        full_ghost.insert(idx, g);
        let s = fb.add_gen(VGen {
            kind: GenKind::GhostStar(idx),
            odd: true,
            weight: data.deg_mu(idx),
        });
        full_gstar.insert(idx, s);
    }
    // current-current: [a λ b] = [a, b] + k(a|b)λ
    for &a in data.basis() {
        for &b in data.basis() {
            let br = data.bracket(&CentElt::gen(a), &CentElt::gen(b));
            let mut p = fb.poly();
            let mut lift = fb.state();
            for (&cidx, cc) in br.terms() {
                lift = lift
                    .add(&fb.state_word(
                        vec![Factor::new(full_current[&cidx], 0)],
                        KPoly::constant(cc.clone()),
                    ))
                    .expect("same builder");
            }
            p.add_term(0, lift);
            let pairing = bilinear_form(lambda, &CentElt::gen(a), &CentElt::gen(b));
            p.add_term(1, fb.state_word(Vec::new(), KPoly::term(pairing, 1)));
            fb.set_bracket(full_current[&a], full_current[&b], p);
        }
    }
    // ghost pairs: [φ_n λ φ^I] = δ_nI
    for &n in data.n_basis() {
        let mut p = fb.poly();
        p.add_term(0, fb.state_word(Vec::new(), KPoly::one()));
        fb.set_bracket(full_ghost[&n], full_gstar[&n], p);
    }
    let full = fb.build()?;
    full.register_names();

    // ---- reduced complex ----
    let mut rb = TableBuilder::new();
    let mut red_block = BTreeMap::new();
    let mut red_gstar = BTreeMap::new();
    for &idx in data.p_basis() {
        let g = rb.add_gen(VGen {
            kind: GenKind::Block(idx),
            odd: false,
            weight: 1 - data.deg_mu(idx),
        });
        red_block.insert(idx, g);
    }
    for &idx in data.n_basis() {
        let s = rb.add_gen(VGen {
            kind: GenKind::GhostStar(idx),
            odd: true,
            weight: data.deg_mu(idx),
        });
        red_gstar.insert(idx, s);
    }
    // [J_a λ J_b] = J_[a,b] + (k(a|b) + τ(a,b))λ for a, b in p
    for &a in data.p_basis() {
        for &b in data.p_basis() {
            let ea = CentElt::gen(a);
            let eb = CentElt::gen(b);
            let br = data.bracket(&ea, &eb);
            let mut p = rb.poly();
            let mut lift = rb.state();
            for (&cidx, cc) in br.terms() {
                debug_assert!(data.in_p(cidx));
                lift = lift
                    .add(&rb.state_word(
                        vec![Factor::new(red_block[&cidx], 0)],
                        KPoly::constant(cc.clone()),
                    ))
                    .expect("same builder");
            }
            p.add_term(0, lift);
            let pairing = KPoly::term(bilinear_form(lambda, &ea, &eb), 1)
                + KPoly::constant(data.trace_term(&ea, &eb));
            p.add_term(1, rb.state_word(Vec::new(), pairing));
            rb.set_bracket(red_block[&a], red_block[&b], p);
        }
    }
    // [J_a λ φ^m] = φ^{(a·m)|n}
    for &a in data.p_basis() {
        for &m in data.n_basis() {
            let mut dual = DualElt::zero();
            dual.add_term(m, Q::one());
            let moved = data.coadjoint(&CentElt::gen(a), &dual);
            let mut p = rb.poly();
            let mut lift = rb.state();
            for (&didx, dc) in moved.terms() {
                lift = lift
                    .add(&rb.state_word(
                        vec![Factor::new(red_gstar[&didx], 0)],
                        KPoly::constant(dc.clone()),
                    ))
                    .expect("same builder");
            }
            p.add_term(0, lift);
            rb.set_bracket(red_block[&a], red_gstar[&m], p);
        }
    }
    let reduced = rb.build()?;

    let d_placeholder = VState::zero(&full);
    let mut ctx = ComplexContext {
        data: data.clone(),
        full,
        reduced,
        full_current,
        full_ghost,
        full_gstar,
        red_block,
        red_gstar,
        d: d_placeholder,
        q_reduced_on_gen: Vec::new(),
    };

    // the element d
    let mut d = VState::zero(&ctx.full);
    for &i in data.n_basis() {
        let word = ctx.full.canon_word(&[
            Factor::new(ctx.full_gstar[&i], 0),
            Factor::new(ctx.full_current[&i], 0),
        ]);
        d = d.add(&word)?;
    }
    d = d.add(&ctx.full_gstar_state(data.chi())?)?;
    for &i in data.n_basis() {
        for &ip in data.n_basis() {
            let br = data.pi_plus(&data.bracket(&CentElt::gen(ip), &CentElt::gen(i)));
            for (&nidx, nc) in br.terms() {
                let word = ctx.full.canon_word(&[
                    Factor::new(ctx.full_gstar[&i], 0),
                    Factor::new(ctx.full_gstar[&ip], 0),
                    Factor::new(ctx.full_ghost[&nidx], 0),
                ]);
                d = d.add(&word.scale(&KPoly::constant(nc / qi(2))))?;
            }
        }
    }
    ctx.d = d;

    // precompute Q̃ on the reduced generators
    let mut q_on_gen = Vec::with_capacity(ctx.reduced.gens().len());
    for gid in 0..ctx.reduced.gens().len() as u32 {
        let image = match ctx.reduced.gen(gid).kind {
            GenKind::Block(a) => ctx.q_reduced_block(a)?,
            GenKind::GhostStar(m) => ctx.q_reduced_gstar(m)?,
            _ => unreachable!("reduced complex has only J and Phi* generators"),
        };
        q_on_gen.push(image);
    }
    ctx.q_reduced_on_gen = q_on_gen;
    Ok(ctx)
}

impl ComplexContext {
    pub fn data(&self) -> &GradedData {
        &self.data
    }

    pub fn full_table(&self) -> &BracketTable {
        &self.full
    }

    pub fn reduced_table(&self) -> &BracketTable {
        &self.reduced
    }

    pub fn d(&self) -> &VState {
        &self.d
    }

    /// Lifts a centralizer element to a current state in the full complex.
    pub fn full_current_state(&self, x: &CentElt) -> Result<VState> {
        let mut out = VState::zero(&self.full);
        for (&idx, c) in x.terms() {
            let g = *self
                .full_current
                .get(&idx)
                .ok_or_else(|| Error::IndexNotInBasis(idx.to_string()))?;
            out = out.add(&VState::generator(&self.full, g).scale(&KPoly::constant(c.clone())))?;
        }
        Ok(out)
    }

    /// φ_x = φ_{π₊ x}: the ghost attached to the 𝔫-component of x.
    pub fn full_ghost_state(&self, x: &CentElt) -> Result<VState> {
        let mut out = VState::zero(&self.full);
        for (&idx, c) in self.data.pi_plus(x).terms() {
            let g = self.full_ghost[&idx];
            out = out.add(&VState::generator(&self.full, g).scale(&KPoly::constant(c.clone())))?;
        }
        Ok(out)
    }

    /// φ^m for a functional m on 𝔫, in the full complex.
    pub fn full_gstar_state(&self, m: &DualElt) -> Result<VState> {
        let mut out = VState::zero(&self.full);
        for (&idx, c) in m.terms() {
            let g = self.full_gstar[&idx];
            out = out.add(&VState::generator(&self.full, g).scale(&KPoly::constant(c.clone())))?;
        }
        Ok(out)
    }

    /// J-lift of an element of 𝔭 in the reduced complex.
    pub fn red_block_state(&self, x: &CentElt) -> Result<VState> {
        let mut out = VState::zero(&self.reduced);
        for (&idx, c) in x.terms() {
            let g = *self
                .red_block
                .get(&idx)
                .ok_or(Error::NotInP)?;
            out = out.add(&VState::generator(&self.reduced, g).scale(&KPoly::constant(c.clone())))?;
        }
        Ok(out)
    }

    /// φ^m in the reduced complex.
    pub fn red_gstar_state(&self, m: &DualElt) -> Result<VState> {
        let mut out = VState::zero(&self.reduced);
        for (&idx, c) in m.terms() {
            let g = self.red_gstar[&idx];
            out = out.add(&VState::generator(&self.reduced, g).scale(&KPoly::constant(c.clone())))?;
        }
        Ok(out)
    }

    /// The building block J_a = a + Σ_I :φ^I φ_{[E_I, a]}: in the full
    /// complex, defined for every a ∈ 𝔞.
    pub fn building_block(&self, a: &CentElt) -> Result<VState> {
        let mut out = self.full_current_state(a)?;
        for &i in self.data.n_basis() {
            let br = self
                .data
                .pi_plus(&self.data.bracket(&CentElt::gen(i), a));
            for (&nidx, nc) in br.terms() {
                let word = self.full.canon_word(&[
                    Factor::new(self.full_gstar[&i], 0),
                    Factor::new(self.full_ghost[&nidx], 0),
                ]);
                out = out.add(&word.scale(&KPoly::constant(nc.clone())))?;
            }
        }
        Ok(out)
    }

    /// Q(A) = [d λ A]|_{λ=0} in the full complex.
    pub fn apply_q_full(&self, a: &VState) -> Result<VState> {
        let br = self.full.lambda_bracket(&self.d, a)?;
        Ok(br.coeff(0).cloned().unwrap_or_else(|| VState::zero(&self.full)))
    }

    fn q_reduced_block(&self, a: GenIndex) -> Result<VState> {
        let ea = CentElt::gen(a);
        let mut out = VState::zero(&self.reduced);
        // Σ_I :φ^I J_{π_≤ [E_I, a]}:
        for &i in self.data.n_basis() {
            let br = self
                .data
                .pi_leq(&self.data.bracket(&CentElt::gen(i), &ea));
            for (&pidx, pc) in br.terms() {
                let word = self.reduced.canon_word(&[
                    Factor::new(self.red_gstar[&i], 0),
                    Factor::new(self.red_block[&pidx], 0),
                ]);
                out = out.add(&word.scale(&KPoly::constant(pc.clone())))?;
            }
        }
        // − φ^{a·χ}
        let achi = self.data.coadjoint(&ea, self.data.chi());
        out = out.sub(&self.red_gstar_state(&achi)?)?;
        // + ∂ Σ_I (k(E_I|a) + τ(E_I, a)) φ^I
        let mut scal = VState::zero(&self.reduced);
        for &i in self.data.n_basis() {
            let ei = CentElt::gen(i);
            let coeff = KPoly::term(bilinear_form(self.data.lambda(), &ei, &ea), 1)
                + KPoly::constant(self.data.trace_term(&ei, &ea));
            scal = scal.add(
                &VState::generator(&self.reduced, self.red_gstar[&i]).scale(&coeff),
            )?;
        }
        out.add(&self.reduced.derivative(&scal))
    }

    fn q_reduced_gstar(&self, m: GenIndex) -> Result<VState> {
        // ½ Σ_I :φ^I φ^{E_I · m}:
        let mut dual = DualElt::zero();
        dual.add_term(m, Q::one());
        let mut out = VState::zero(&self.reduced);
        for &i in self.data.n_basis() {
            let moved = self.data.coadjoint(&CentElt::gen(i), &dual);
            for (&didx, dc) in moved.terms() {
                let word = self.reduced.canon_word(&[
                    Factor::new(self.red_gstar[&i], 0),
                    Factor::new(self.red_gstar[&didx], 0),
                ]);
                out = out.add(&word.scale(&KPoly::constant(dc / qi(2))))?;
            }
        }
        Ok(out)
    }

    /// Q̃(A) for a state of the reduced complex: the odd table-driven
    /// derivation with Q̃∂ = ∂Q̃.
    pub fn apply_q_reduced(&self, a: &VState) -> Result<VState> {
        if a.ctx() != self.reduced.id() {
            return Err(Error::NotInReducedComplex);
        }
        let mut out = VState::zero(&self.reduced);
        for (word, c) in a.terms() {
            out = out.add(&self.q_word(word)?.scale(c))?;
        }
        Ok(out)
    }

    fn q_word(&self, word: &[Factor]) -> Result<VState> {
        if word.is_empty() {
            return Ok(VState::zero(&self.reduced));
        }
        let head = word[0];
        let rest = &word[1..];
        // Q(:a W:) = :Q(a) W: + (−1)^{p(a)} :a Q(W):
        let mut qa = self.q_reduced_on_gen[head.gen as usize].clone();
        for _ in 0..head.t {
            qa = self.reduced.derivative(&qa);
        }
        let rest_state = if rest.is_empty() {
            VState::vacuum(&self.reduced)
        } else {
            self.reduced.canon_word(rest)
        };
        let out = self.reduced.normal_product(&qa, &rest_state)?;
        let mut tail = self.q_word(rest)?;
        if self.reduced.gen(head.gen).odd {
            tail = tail.neg();
        }
        let head_state = VState::from_factor(&self.reduced, head);
        out.add(&self.reduced.normal_product(&head_state, &tail)?)
    }

    /// Embeds a reduced state into the full complex: J-generators become
    /// building blocks, φ^I stays φ^I, respecting nesting and derivatives.
    pub fn embed_reduced(&self, a: &VState) -> Result<VState> {
        if a.ctx() != self.reduced.id() {
            return Err(Error::NotInReducedComplex);
        }
        let mut out = VState::zero(&self.full);
        for (word, c) in a.terms() {
            out = out.add(&self.embed_word(word)?.scale(c))?;
        }
        Ok(out)
    }

    fn embed_word(&self, word: &[Factor]) -> Result<VState> {
        if word.is_empty() {
            return Ok(VState::vacuum(&self.full));
        }
        let head = word[0];
        let mut mapped = match self.reduced.gen(head.gen).kind {
            GenKind::Block(a) => self.building_block(&CentElt::gen(a))?,
            GenKind::GhostStar(m) => {
                VState::generator(&self.full, self.full_gstar[&m])
            }
            _ => unreachable!(),
        };
        for _ in 0..head.t {
            mapped = self.full.derivative(&mapped);
        }
        let rest = self.embed_word(&word[1..])?;
        self.full.normal_product(&mapped, &rest)
    }

    /// Right-hand side of the bracket identity for [d λ J_a]:
    /// Σ_I :φ^I J_{π_≤\[E_I,a\]}: − φ^{a·χ}
    /// + (λ+∂) Σ_I (k(E_I|a) + τ(E_I,a)) φ^I, all in the full complex.
    pub fn d_building_block_rhs(&self, a: &CentElt) -> Result<LambdaPoly> {
        let mut deg0 = VState::zero(&self.full);
        for &i in self.data.n_basis() {
            let br = self.data.pi_leq(&self.data.bracket(&CentElt::gen(i), a));
            if br.is_zero() {
                continue;
            }
            let jb = self.building_block(&br)?;
            let star = VState::generator(&self.full, self.full_gstar[&i]);
            deg0 = deg0.add(&self.full.normal_product(&star, &jb)?)?;
        }
        let achi = self.data.coadjoint(a, self.data.chi());
        deg0 = deg0.sub(&self.full_gstar_state(&achi)?)?;
        let mut scal = VState::zero(&self.full);
        for &i in self.data.n_basis() {
            let ei = CentElt::gen(i);
            let coeff = KPoly::term(bilinear_form(self.data.lambda(), &ei, a), 1)
                + KPoly::constant(self.data.trace_term(&ei, a));
            scal = scal.add(&VState::generator(&self.full, self.full_gstar[&i]).scale(&coeff))?;
        }
        let mut out = LambdaPoly::zero(&self.full);
        out.add_term(0, deg0.add(&self.full.derivative(&scal))?);
        out.add_term(1, scal);
        Ok(out)
    }

    /// The weight-2 affine generator G_nα^(r) of the minimal case.
    pub fn minimal_affine_weight2(&self, lead: GenIndex) -> Result<VState> {
        let n = self.data.lambda().rows();
        let lambda = self.data.lambda();
        let (alpha, r) = (lead.j, lead.r);
        let ln = lambda.part(n) as i64;
        let total = ln - 1 + r;
        let mut out = self.red_block_state(&CentElt::gen(lead))?;
        let pair_sum = |i1: usize, j1: usize, i2: usize, j2: usize| -> Result<VState> {
            let mut acc = VState::zero(&self.reduced);
            for a in 0..=total {
                let b = total - a;
                let f1 = GenIndex::new(i1, j1, a);
                let f2 = GenIndex::new(i2, j2, b);
                if crate::centralizer::in_basis(lambda, f1)
                    && crate::centralizer::in_basis(lambda, f2)
                {
                    let s1 = self.red_block_state(&CentElt::gen(f1))?;
                    let s2 = self.red_block_state(&CentElt::gen(f2))?;
                    acc = acc.add(&self.reduced.normal_product(&s1, &s2)?)?;
                }
            }
            Ok(acc)
        };
        out = out.add(&pair_sum(n - 1, alpha, n, n)?)?;
        for gamma in 1..=n.saturating_sub(2) {
            out = out.sub(&pair_sum(n - 1, gamma, gamma, alpha)?)?;
        }
        if r == 0 && lambda.part(alpha) == lambda.part(n) {
            let corr = self.red_block_state(&CentElt::gen(GenIndex::new(n - 1, alpha, ln - 1)))?;
            let coeff = KPoly::term(Q::one(), 1) + KPoly::constant(qi(ln));
            out = out.sub(&self.reduced.derivative(&corr).scale(&coeff))?;
        }
        Ok(out)
    }

    /// {J_a : a ∈ B₁} followed by the weight-2 family {G_nα^(r)}.
    pub fn minimal_affine_generators(&self) -> Result<Vec<VState>> {
        let mut out = Vec::new();
        for b in minimal_b1(&self.data)? {
            out.push(self.red_block_state(&b)?);
        }
        for lead in minimal_b2(&self.data)? {
            out.push(self.minimal_affine_weight2(lead)?);
        }
        Ok(out)
    }

    /// The linear part of a reduced state: coefficients of underived
    /// single-J words, as a centralizer element.
    pub fn linear_part(&self, a: &VState) -> CentElt {
        let mut out = CentElt::zero();
        for (word, c) in a.terms() {
            if word.len() == 1 && word[0].t == 0 {
                if let GenKind::Block(idx) = self.reduced.gen(word[0].gen).kind {
                    if let Some(0) = c.degree() {
                        out.add_term(idx, c.coeff(0));
                    }
                }
            }
        }
        out
    }

    /// Validates an affine candidate family: Q̃-closedness (error on
    /// failure), weight histogram against ker φ, linear-part ranks.
    pub fn validate_affine_generating_set(&self, candidates: &[VState]) -> Result<GenSetReport> {
        let mut reports = Vec::new();
        for (index, w) in candidates.iter().enumerate() {
            let residue = self.apply_q_reduced(w)?;
            if !residue.is_zero() {
                return Err(Error::NotClosed {
                    candidate: self.reduced.display(w),
                    residue: self.reduced.display(&residue),
                });
            }
            let weight = self.reduced.conformal_weight(w).unwrap_or(0);
            reports.push(CandidateReport {
                index,
                weight,
                check_ok: true,
                linear: self.linear_part(w),
            });
        }
        Ok(assemble_report("closed", &self.data, reports))
    }
}

impl fmt::Debug for ComplexContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ComplexContext(lambda = {}, mu = {})",
            self.data.lambda(),
            self.data.mu()
        )
    }
}

// ---- conformal-vector search ---------------------------------------------

/// Outcome of the weight-2 conformal-vector search.
pub enum ConformalOutcome {
    /// No nontrivial solution at any of the recorded specializations of k;
    /// certifies the generic-k unsolvability.
    NoNontrivialSolution { specializations: Vec<Q> },
    /// A nontrivial solution was found at every specialization; the witness
    /// records the first one.
    Solution {
        k_value: Q,
        coefficients: Vec<Q>,
        central: Q,
    },
    /// The specialized quadratic systems fell outside the elimination
    /// fragment; never silently treated as UNSAT.
    Undecided { reason: String },
}

impl fmt::Display for ConformalOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConformalOutcome::NoNontrivialSolution { specializations } => {
                let ks: Vec<String> = specializations.iter().map(|k| k.to_string()).collect();
                write!(f, "UNSAT (no non-trivial solution; k specialized at {})", ks.join(", "))
            }
            ConformalOutcome::Solution {
                k_value,
                coefficients,
                central,
            } => {
                let cs: Vec<String> = coefficients.iter().map(|c| c.to_string()).collect();
                write!(
                    f,
                    "solution at k = {}: coefficients ({}), central term {}",
                    k_value,
                    cs.join(", "),
                    central
                )
            }
            ConformalOutcome::Undecided { reason } => write!(f, "undecided: {}", reason),
        }
    }
}

enum SymTerm {
    Quad(usize, usize),
    Lin(usize),
}

/// Decides solvability of [w λ w] = (∂ + 2λ)w + cλ³ over the span of the
/// ansatz states, by clearing k through five generic rational
/// specializations and exhaustively eliminating the small quadratic systems.
pub fn conformal_vector_search(table: &BracketTable, ansatz: &[VState]) -> Result<ConformalOutcome> {
    if ansatz.is_empty() {
        return Ok(ConformalOutcome::NoNontrivialSolution {
            specializations: Vec::new(),
        });
    }
    let k_values = [qi(5), qi(7), q(11, 2), q(13, 3), qi(17)];
    let nv = ansatz.len(); // variable nv is the central coefficient c
    // coordinates (λ-exponent, word) -> symbolic quadratic/linear equation
    // data, assembled once; k is specialized afterwards
    type SymSystem = BTreeMap<(u32, Vec<Factor>), Vec<(SymTerm, KPoly)>>;
    let mut sym: SymSystem = BTreeMap::new();
    for (i, bi) in ansatz.iter().enumerate() {
        for (j, bj) in ansatz.iter().enumerate() {
            let br = table.lambda_bracket(bi, bj)?;
            for (&m, st) in br.coeffs() {
                for (w, c) in st.terms() {
                    sym.entry((m, w.clone()))
                        .or_default()
                        .push((SymTerm::Quad(i, j), c.clone()));
                }
            }
        }
        let dbi = table.derivative(bi);
        for (w, c) in dbi.terms() {
            sym.entry((0, w.clone()))
                .or_default()
                .push((SymTerm::Lin(i), -c.clone()));
        }
        for (w, c) in bi.terms() {
            sym.entry((1, w.clone()))
                .or_default()
                .push((SymTerm::Lin(i), c.scale(&qi(-2))));
        }
    }
    sym.entry((3, Vec::new()))
        .or_default()
        .push((SymTerm::Lin(nv), KPoly::constant(-Q::one())));

    let mut unsat_at = Vec::new();
    let mut first_solution: Option<(Q, Vec<Q>, Q)> = None;
    for k0 in &k_values {
        let mut eqs: BTreeMap<(u32, Vec<Factor>), solver::Poly2> = BTreeMap::new();
        for (key, terms) in &sym {
            let p = eqs.entry(key.clone()).or_insert_with(solver::Poly2::zero);
            for (term, c) in terms {
                let v = c.eval(k0);
                match term {
                    SymTerm::Quad(i, j) => p.add_quad(*i, *j, v),
                    SymTerm::Lin(i) => p.add_lin(*i, v),
                }
            }
        }
        let system: Vec<solver::Poly2> = eqs.into_values().filter(|p| !p.is_zero()).collect();
        match solver::solve(system, nv + 1) {
            solver::Outcome::Unsat => unsat_at.push(k0.clone()),
            solver::Outcome::Solutions(sols) => {
                let nontrivial = sols
                    .iter()
                    .find(|s| s[..nv].iter().any(|v| !v.is_zero()));
                match nontrivial {
                    Some(sol) => {
                        if first_solution.is_none() {
                            first_solution =
                                Some((k0.clone(), sol[..nv].to_vec(), sol[nv].clone()));
                        }
                    }
                    None => unsat_at.push(k0.clone()),
                }
            }
            solver::Outcome::Stuck(reason) => {
                return Ok(ConformalOutcome::Undecided { reason });
            }
        }
    }
    if !unsat_at.is_empty() {
        return Ok(ConformalOutcome::NoNontrivialSolution {
            specializations: unsat_at,
        });
    }
    let (k_value, coefficients, central) = first_solution.expect("all specializations solved");
    Ok(ConformalOutcome::Solution {
        k_value,
        coefficients,
        central,
    })
}

/// Exact elimination for the small quadratic systems produced by the
/// conformal-vector search.
mod solver {
    use crate::scalar::Q;
    use num::{One, Signed, Zero};
    use std::collections::BTreeMap;

    /// Polynomial of total degree ≤ 2 over ℚ in `nv` variables.
    #[derive(Clone, PartialEq)]
    pub struct Poly2 {
        pub c0: Q,
        pub lin: BTreeMap<usize, Q>,
        pub quad: BTreeMap<(usize, usize), Q>,
    }

    impl Poly2 {
        pub fn zero() -> Self {
            Poly2 {
                c0: Q::zero(),
                lin: BTreeMap::new(),
                quad: BTreeMap::new(),
            }
        }

        pub fn is_zero(&self) -> bool {
            self.c0.is_zero() && self.lin.is_empty() && self.quad.is_empty()
        }

        pub fn add_lin(&mut self, v: usize, c: Q) {
            if c.is_zero() {
                return;
            }
            let e = self.lin.entry(v).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                self.lin.remove(&v);
            }
        }

        pub fn add_quad(&mut self, i: usize, j: usize, c: Q) {
            if c.is_zero() {
                return;
            }
            let key = (i.min(j), i.max(j));
            let e = self.quad.entry(key).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                self.quad.remove(&key);
            }
        }

        /// Substitute variable v := value.
        fn substitute(&self, v: usize, value: &Q) -> Poly2 {
            let mut out = Poly2::zero();
            out.c0 = self.c0.clone();
            for (&w, c) in &self.lin {
                if w == v {
                    out.c0 += c * value;
                } else {
                    out.add_lin(w, c.clone());
                }
            }
            for (&(i, j), c) in &self.quad {
                match (i == v, j == v) {
                    (true, true) => out.c0 += c * value * value,
                    (true, false) => out.add_lin(j, c * value),
                    (false, true) => out.add_lin(i, c * value),
                    (false, false) => out.add_quad(i, j, c.clone()),
                }
            }
            out
        }

        fn vars(&self) -> Vec<usize> {
            let mut vs: Vec<usize> = self.lin.keys().copied().collect();
            for &(i, j) in self.quad.keys() {
                vs.push(i);
                vs.push(j);
            }
            vs.sort_unstable();
            vs.dedup();
            vs
        }
    }

    pub enum Outcome {
        Unsat,
        /// Concrete solutions (free variables set to 1).
        Solutions(Vec<Vec<Q>>),
        Stuck(String),
    }

    fn rational_sqrt(x: &Q) -> Option<Q> {
        if x.is_negative() {
            return None;
        }
        if x.is_zero() {
            return Some(Q::zero());
        }
        let n = x.numer().sqrt();
        let d = x.denom().sqrt();
        let cand = Q::new(n, d);
        if &(&cand * &cand) == x {
            Some(cand)
        } else {
            None
        }
    }

    pub fn solve(eqs: Vec<Poly2>, nv: usize) -> Outcome {
        let mut assign: Vec<Option<Q>> = vec![None; nv];
        match solve_rec(eqs, &mut assign) {
            Rec::Unsat => Outcome::Unsat,
            Rec::Stuck(reason) => Outcome::Stuck(reason),
            Rec::Sols(sols) => Outcome::Solutions(
                sols.into_iter()
                    .map(|s| {
                        s.into_iter()
                            .map(|v| v.unwrap_or_else(Q::zero))
                            .collect()
                    })
                    .collect(),
            ),
        }
    }

    enum Rec {
        Unsat,
        Sols(Vec<Vec<Option<Q>>>),
        Stuck(String),
    }

    /// Free variables are left unassigned and later tried at 1 to witness
    /// nontriviality. A branch that falls outside the elimination fragment
    /// is reported as stuck, never folded into an UNSAT claim.
    fn solve_rec(mut eqs: Vec<Poly2>, assign: &mut [Option<Q>]) -> Rec {
        loop {
            eqs.retain(|e| !e.is_zero());
            if eqs.iter().any(|e| e.lin.is_empty() && e.quad.is_empty()) {
                return Rec::Unsat; // nonzero constant equation
            }
            if eqs.is_empty() {
                // remaining variables free: for nontriviality witnesses, set
                // each free variable to 1 (any value satisfies the system)
                let sol: Vec<Option<Q>> = assign
                    .iter()
                    .map(|v| Some(v.clone().unwrap_or_else(Q::one)))
                    .collect();
                return Rec::Sols(vec![sol]);
            }
            // 1) single-variable linear equation
            if let Some(pos) = eqs
                .iter()
                .position(|e| e.quad.is_empty() && e.lin.len() == 1)
            {
                let eq = eqs[pos].clone();
                let (&v, coeff) = eq.lin.iter().next().unwrap();
                let value = -&eq.c0 / coeff;
                assign[v] = Some(value.clone());
                eqs = eqs.iter().map(|e| e.substitute(v, &value)).collect();
                continue;
            }
            // 2) univariate quadratic equation
            if let Some(pos) = eqs.iter().position(|e| {
                let vs = e.vars();
                vs.len() == 1 && !e.quad.is_empty()
            }) {
                let eq = eqs[pos].clone();
                let v = eq.vars()[0];
                let a = eq.quad.get(&(v, v)).cloned().unwrap_or_else(Q::zero);
                let b = eq.lin.get(&v).cloned().unwrap_or_else(Q::zero);
                let c = eq.c0.clone();
                let disc = &b * &b - Q::from_integer(4.into()) * &a * &c;
                let Some(root) = rational_sqrt(&disc) else {
                    return Rec::Unsat; // no rational root on this branch
                };
                let two_a = Q::from_integer(2.into()) * &a;
                let mut roots = vec![(-&b + &root) / &two_a];
                if !root.is_zero() {
                    roots.push((-&b - &root) / &two_a);
                }
                let mut all = Vec::new();
                let mut stuck = None;
                for r in roots {
                    let mut sub_assign = assign.to_vec();
                    sub_assign[v] = Some(r.clone());
                    let sub_eqs: Vec<Poly2> =
                        eqs.iter().map(|e| e.substitute(v, &r)).collect();
                    match solve_rec(sub_eqs, &mut sub_assign) {
                        Rec::Sols(sols) => all.extend(sols),
                        Rec::Stuck(reason) => stuck = Some(reason),
                        Rec::Unsat => {}
                    }
                }
                if !all.is_empty() {
                    return Rec::Sols(all);
                }
                if let Some(reason) = stuck {
                    return Rec::Stuck(reason);
                }
                return Rec::Unsat;
            }
            // 3) linear Gaussian round: solve variables forced to constants
            let linear: Vec<&Poly2> = eqs.iter().filter(|e| e.quad.is_empty()).collect();
            if !linear.is_empty() {
                let vars: Vec<usize> = {
                    let mut vs: Vec<usize> =
                        linear.iter().flat_map(|e| e.vars()).collect();
                    vs.sort_unstable();
                    vs.dedup();
                    vs
                };
                let vpos: BTreeMap<usize, usize> =
                    vars.iter().enumerate().map(|(k, &v)| (v, k)).collect();
                let mut rows: Vec<Vec<Q>> = linear
                    .iter()
                    .map(|e| {
                        let mut row = vec![Q::zero(); vars.len() + 1];
                        for (&v, c) in &e.lin {
                            row[vpos[&v]] = c.clone();
                        }
                        row[vars.len()] = e.c0.clone();
                        row
                    })
                    .collect();
                let pivots = crate::linalg::rref(&mut rows);
                let mut progressed = false;
                for (ri, &pc) in pivots.iter().enumerate() {
                    if pc == vars.len() {
                        return Rec::Unsat; // 0 = nonzero row
                    }
                    let only_pivot = rows[ri][..vars.len()]
                        .iter()
                        .enumerate()
                        .all(|(ci, cv)| ci == pc || cv.is_zero());
                    if only_pivot {
                        let value = -rows[ri][vars.len()].clone();
                        let v = vars[pc];
                        if assign[v].is_none() {
                            assign[v] = Some(value.clone());
                            eqs = eqs.iter().map(|e| e.substitute(v, &value)).collect();
                            progressed = true;
                        }
                    }
                }
                if progressed {
                    continue;
                }
                // consistent underdetermined linear system and nothing else:
                // pick free variables = 1 and back-substitute pivots
                if eqs.iter().all(|e| e.quad.is_empty()) {
                    let free: Vec<usize> = vars
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| !pivots.contains(k))
                        .map(|(_, &v)| v)
                        .collect();
                    let mut cur = eqs.clone();
                    let mut sub_assign = assign.to_vec();
                    for v in free {
                        sub_assign[v] = Some(Q::one());
                        cur = cur.iter().map(|e| e.substitute(v, &Q::one())).collect();
                    }
                    return solve_rec(cur, &mut sub_assign);
                }
            }
            return Rec::Stuck("equations outside the elimination fragment".into());
        }
    }

}
