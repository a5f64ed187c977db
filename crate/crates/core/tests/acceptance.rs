//! Acceptance suite: every criterion is one test that prints a single
//! PASS/FAIL line (run with `--nocapture` to see them). All arithmetic is
//! exact; "match" means exact symbolic equality after canonicalization.

use walgebra::axioms::run_axiom_suite;
use walgebra::brst::{build_context, conformal_vector_search, ConformalOutcome};
use walgebra::centralizer::{
    basis_indices, bilinear_form, bracket, embed, graded_data, CentElt, GradedData,
};
use walgebra::finite_w::{
    minimal_b1, minimal_b2, minimal_generators, minimal_weight2, principal_generators,
    principal_linear_parts, validate_generating_set,
};
use walgebra::pyramid::Pyramid;
use walgebra::scalar::{q, qi, KPoly, Q};
use walgebra::text::parse_uea;
use walgebra::uea::{is_invariant, reduce_mod_ideal, UEAElement};
use walgebra::vertex::{LambdaPoly, VState};

use num::Zero;

fn pyr(parts: &[i64]) -> Pyramid {
    Pyramid::build(parts).unwrap()
}

fn ctx(lp: &[i64], mp: &[i64]) -> GradedData {
    graded_data(&pyr(lp), &pyr(mp)).unwrap()
}

fn criterion(n: u32, name: &str, body: impl FnOnce() -> Result<(), String>) {
    let start = std::time::Instant::now();
    match body() {
        Ok(()) => println!(
            "criterion {:2} [{}]: PASS ({} ms)",
            n,
            name,
            start.elapsed().as_millis()
        ),
        Err(e) => {
            println!("criterion {:2} [{}]: FAIL — {}", n, name, e);
            panic!("criterion {} failed: {}", n, e);
        }
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

#[test]
fn criterion_01_structure_constant_oracle() {
    criterion(1, "structure-constant oracle", || {
        for parts in [vec![1, 1], vec![2, 3], vec![1, 2, 2], vec![2, 3, 5]] {
            let p = pyr(&parts);
            let n = p.boxes();
            let basis = basis_indices(&p);
            for &a in &basis {
                for &b in &basis {
                    let br = bracket(&p, a, b);
                    let ma = embed(&p, a).unwrap();
                    let mb = embed(&p, b).unwrap();
                    // matrix commutator
                    let mut comm = vec![vec![0i64; n]; n];
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                comm[i][j] += ma[i][k] * mb[k][j] - mb[i][k] * ma[k][j];
                            }
                        }
                    }
                    let mut lifted = vec![vec![Q::zero(); n]; n];
                    for (&idx, c) in br.terms() {
                        let m = embed(&p, idx).unwrap();
                        for i in 0..n {
                            for j in 0..n {
                                if m[i][j] != 0 {
                                    lifted[i][j] += c * qi(m[i][j]);
                                }
                            }
                        }
                    }
                    for i in 0..n {
                        for j in 0..n {
                            ensure(
                                lifted[i][j] == qi(comm[i][j]),
                                format!("bracket mismatch at λ={:?}, [{},{}]", parts, a, b),
                            )?;
                        }
                    }
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_02_phi_map_rank_and_kernel() {
    criterion(2, "phi-map rank/kernel", || {
        let pairs: [(&[i64], &[i64]); 10] = [
            (&[1, 1], &[2]),
            (&[2, 2], &[2]),
            (&[1, 2], &[1, 1]),
            (&[1, 2], &[2]),
            (&[1, 1, 2], &[1, 2]),
            (&[1, 1, 2], &[3]),
            (&[1, 1, 2, 2], &[1, 1, 2]),
            (&[2, 3], &[2]),
            (&[1, 2, 2], &[3]),
            (&[1, 1, 1], &[3]),
        ];
        for (lp, mp) in pairs {
            let data = ctx(lp, mp);
            ensure(
                data.lambda().boxes() <= 8,
                format!("context {:?}/{:?} exceeds N ≤ 8", lp, mp),
            )?;
            ensure(
                data.phi_rank() == data.dim_n(),
                format!("rank φ ≠ |S_(λ,μ)| for {:?}/{:?}", lp, mp),
            )?;
            let ker = data.ker_phi_basis();
            ensure(
                ker.len() == data.a0_basis().len(),
                format!("dim ker φ ≠ dim a(0) for {:?}/{:?}", lp, mp),
            )?;
            if mp.len() == 1 {
                // principal: weight profile dim[m] = λ_{n−m+1}
                let n = lp.len();
                for m in 1..=n {
                    let got = ker.iter().filter(|(_, w)| *w == m as i64).count();
                    let want = data.lambda().part(n - m + 1);
                    ensure(
                        got == want,
                        format!("profile dim[{}] = {} ≠ {} for {:?}", m, got, want, lp),
                    )?;
                }
            }
        }
        Ok(())
    });
}

const BRST_CONTEXTS: [(&[i64], &[i64]); 5] = [
    (&[1, 1], &[2]),
    (&[2, 2], &[2]),
    (&[1, 2], &[1, 1]),
    (&[1, 1, 2], &[1, 2]),
    (&[1, 1, 2, 2], &[1, 1, 2]),
];

#[test]
fn criterion_03_brst_differential() {
    criterion(3, "BRST differential", || {
        for (lp, mp) in BRST_CONTEXTS {
            let c = build_context(&ctx(lp, mp)).unwrap();
            let dd = c.full_table().lambda_bracket(c.d(), c.d()).unwrap();
            ensure(dd.is_zero(), format!("[d λ d] ≠ 0 for {:?}/{:?}", lp, mp))?;
            for g in 0..c.reduced_table().gens().len() as u32 {
                let gen = VState::generator(c.reduced_table(), g);
                let qq = c
                    .apply_q_reduced(&c.apply_q_reduced(&gen).unwrap())
                    .unwrap();
                ensure(
                    qq.is_zero(),
                    format!("Q̃² ≠ 0 on generator {} for {:?}/{:?}", g, lp, mp),
                )?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_04_building_block_identities() {
    criterion(4, "building-block identities", || {
        for (lp, mp) in BRST_CONTEXTS {
            let data = ctx(lp, mp);
            let c = build_context(&data).unwrap();
            for &a in data.basis() {
                let ea = CentElt::gen(a);
                let ja = c.building_block(&ea).unwrap();
                let got = c.full_table().lambda_bracket(c.d(), &ja).unwrap();
                let want = c.d_building_block_rhs(&ea).unwrap();
                ensure(
                    got == want,
                    format!("[d λ J_a] mismatch at a={} in {:?}/{:?}", a, lp, mp),
                )?;
                for &n in data.n_basis() {
                    let ghost = c.full_ghost_state(&CentElt::gen(n)).unwrap();
                    let br = c.full_table().lambda_bracket(&ja, &ghost).unwrap();
                    let want = c
                        .full_ghost_state(&data.bracket(&ea, &CentElt::gen(n)))
                        .unwrap();
                    let mut expect = LambdaPoly::zero(c.full_table());
                    expect.add_term(0, want);
                    ensure(
                        br == expect,
                        format!("[J_a λ φ_n] mismatch at a={}, n={} in {:?}/{:?}", a, n, lp, mp),
                    )?;
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_05_example_2_2_reproduction() {
    criterion(5, "example λ=(2,2) reproduction", || {
        let c = build_context(&ctx(&[2, 2], &[2])).unwrap();
        let t = c.reduced_table();
        let gens = c.minimal_affine_generators().unwrap();
        ensure(gens.len() == 4, "expected 4 generators")?;
        for (i, w) in gens.iter().enumerate() {
            let qw = c.apply_q_reduced(w).unwrap();
            ensure(qw.is_zero(), format!("Q̃(w{}) ≠ 0", i + 1))?;
        }
        let (w2, w3, w4) = (&gens[1], &gens[2], &gens[3]);
        for (i, a) in gens.iter().enumerate() {
            for (j, b) in gens.iter().enumerate() {
                let br = t.lambda_bracket(a, b).unwrap();
                if (i, j) == (2, 2) {
                    ensure(!br.is_zero(), "[w3 λ w3] must not vanish")?;
                } else {
                    ensure(br.is_zero(), format!("[w{} λ w{}] ≠ 0", i + 1, j + 1))?;
                }
            }
        }
        let br33 = t.lambda_bracket(w3, w3).unwrap();
        let w2w2 = t.normal_product(w2, w2).unwrap();
        let inner = w4
            .scale(&(KPoly::term(qi(-1), 1) + KPoly::constant(qi(-4))))
            .add(&w2w2.scale(&(KPoly::term(q(1, 4), 1) + KPoly::one())))
            .unwrap();
        let mut want = LambdaPoly::zero(t);
        want.add_term(0, t.derivative(&inner));
        want.add_term(1, inner.scale(&KPoly::constant(qi(2))));
        ensure(
            br33 == want,
            "[w3 λ w3] ≠ (∂+2λ)(−(k+4)w4 + (k/4+1):w2w2:)",
        )?;
        let (w1, w2) = (&gens[0], &gens[1]);
        let ansatz = vec![
            t.derivative(w1),
            t.derivative(w2),
            t.normal_product(w1, w1).unwrap(),
            t.normal_product(w1, w2).unwrap(),
            t.normal_product(w2, w2).unwrap(),
            w3.clone(),
            w4.clone(),
        ];
        match conformal_vector_search(t, &ansatz).unwrap() {
            ConformalOutcome::NoNontrivialSolution { specializations } => {
                ensure(specializations.len() == 5, "expected 5 recorded specializations")?
            }
            other => return Err(format!("conformal search: expected UNSAT, got {}", other)),
        }
        Ok(())
    });
}

#[test]
fn criterion_06_principal_finite_case() {
    criterion(6, "principal finite case", || {
        for lp in [vec![2, 3], vec![1, 2, 2], vec![2, 2]] {
            let n = lp.len() as i64;
            let data = ctx(&lp, &[n]);
            let gens = principal_generators(&data).unwrap();
            ensure(
                gens.len() == data.lambda().boxes(),
                format!("count ≠ N for {:?}", lp),
            )?;
            for g in &gens {
                for &bidx in data.basis() {
                    let e = UEAElement::gen(&data, bidx);
                    ensure(
                        g.phi.mul(&data, &e).unwrap() == e.mul(&data, &g.phi).unwrap(),
                        format!("Φ_{}^({}) not central in U(a) for {:?}", g.m, g.r, lp),
                    )?;
                }
                ensure(
                    is_invariant(&data, &g.psi).0,
                    format!("Ψ_{}^({}) not invariant for {:?}", g.m, g.r, lp),
                )?;
            }
            let linears = principal_linear_parts(&data).unwrap();
            for (g, (m, r, lin)) in gens.iter().zip(&linears) {
                ensure((g.m, g.r) == (*m, *r), "window order mismatch")?;
                let (deg, got) = g.psi.gr_linear_part(&data).unwrap();
                ensure(deg == g.m as i64, "Kazhdan top degree ≠ m")?;
                ensure(
                    &got == lin,
                    format!("linear part mismatch for Ψ_{}^({}) at {:?}", g.m, g.r, lp),
                )?;
            }
            let psis: Vec<UEAElement> = gens.iter().map(|g| g.psi.clone()).collect();
            let report = validate_generating_set(&data, &psis);
            ensure(
                report.pass,
                format!("validator failed for {:?}: {}", lp, report),
            )?;
            for a in &psis {
                for b in &psis {
                    let ab = reduce_mod_ideal(&data, &a.mul(&data, b).unwrap());
                    let ba = reduce_mod_ideal(&data, &b.mul(&data, a).unwrap());
                    ensure(ab == ba, format!("Ψ's fail to commute mod I for {:?}", lp))?;
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_07_minimal_finite_case() {
    criterion(7, "minimal finite case", || {
        let data = ctx(&[1, 1, 2, 2], &[1, 1, 2]);
        let reference = [
            "E[4,1,0] + E[3,1,0] E[4,4,1]",
            "E[4,2,0] + E[3,2,0] E[4,4,1]",
            "E[4,3,1] + E[3,3,1] E[4,4,1]",
            "E[4,3,0] + E[3,3,0] E[4,4,1] + E[3,3,1] E[4,4,0] - E[3,1,0] E[1,3,1] - E[3,2,0] E[2,3,1] - 2 E[3,3,1]",
        ];
        let b1 = minimal_b1(&data).unwrap();
        for b in &b1 {
            ensure(
                is_invariant(&data, &UEAElement::from_cent(&data, b)).0,
                format!("B1 element {} not invariant", b),
            )?;
        }
        let mut built: Vec<String> = minimal_b2(&data)
            .unwrap()
            .into_iter()
            .map(|lead| minimal_weight2(&data, lead).unwrap().to_string())
            .collect();
        built.sort();
        let mut expect: Vec<String> = reference
            .iter()
            .map(|s| parse_uea(&data, s).unwrap().to_string())
            .collect();
        expect.sort();
        ensure(built == expect, "reference weight-2 generators differ")?;
        for s in reference {
            let x = parse_uea(&data, s).unwrap();
            ensure(is_invariant(&data, &x).0, format!("`{}` not invariant", s))?;
        }
        let gens = minimal_generators(&data).unwrap();
        ensure(gens.len() == 12, "total ≠ 12 = dim a(0)")?;
        ensure(gens.len() == data.a0_basis().len(), "total ≠ dim a(0)")?;
        let report = validate_generating_set(&data, &gens);
        ensure(report.pass, format!("validator failed: {}", report))?;
        ensure(
            report.actual_histogram.get(&1) == Some(&8)
                && report.actual_histogram.get(&2) == Some(&4),
            "histogram ≠ (8,4)",
        )?;
        Ok(())
    });
}

#[test]
fn criterion_08_minimal_affine_case() {
    criterion(8, "minimal affine case", || {
        for lp in [vec![1, 1, 2, 2], vec![1, 1, 2, 3]] {
            let data = ctx(&lp, &[1, 1, 2]);
            let c = build_context(&data).unwrap();
            for b in minimal_b1(&data).unwrap() {
                let jb = c.red_block_state(&b).unwrap();
                ensure(
                    c.apply_q_reduced(&jb).unwrap().is_zero(),
                    format!("Q̃(J_a) ≠ 0 for a = {} at {:?}", b, lp),
                )?;
            }
            for lead in minimal_b2(&data).unwrap() {
                let g = c.minimal_affine_weight2(lead).unwrap();
                ensure(
                    c.apply_q_reduced(&g).unwrap().is_zero(),
                    format!("Q̃(G) ≠ 0 for lead {} at {:?}", lead, lp),
                )?;
                if lp == [1, 1, 2, 3] {
                    for (w, _) in g.terms() {
                        for f in w {
                            ensure(f.t == 0, "∂-term present for (1,1,2,3)")?;
                        }
                    }
                }
            }
            let gens = c.minimal_affine_generators().unwrap();
            let report = c.validate_affine_generating_set(&gens).unwrap();
            ensure(report.pass, format!("validator failed at {:?}: {}", lp, report))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_09_degenerate_mu() {
    criterion(9, "degenerate μ = (1,…,1)", || {
        for lp in [vec![1, 2], vec![2, 3, 5]] {
            let mp = vec![1i64; lp.len()];
            let data = ctx(&lp, &mp);
            // every element is invariant
            let mut elements: Vec<UEAElement> = data
                .basis()
                .iter()
                .map(|&a| UEAElement::gen(&data, a))
                .collect();
            let a0 = elements[0].clone();
            let a1 = elements[elements.len() - 1].clone();
            elements.push(a0.mul(&data, &a1).unwrap());
            elements.push(a1.mul(&data, &a0).unwrap().scale(&q(3, 4)));
            for x in &elements {
                ensure(
                    is_invariant(&data, x).0,
                    "invariance must be vacuous for empty n",
                )?;
                ensure(
                    reduce_mod_ideal(&data, x) == *x,
                    "reduction must be the identity",
                )?;
            }
            // reduced table is the affine vertex algebra: J_[a,b] + k(a|b)λ
            let c = build_context(&data).unwrap();
            for &a in data.p_basis() {
                for &b in data.p_basis() {
                    let ea = CentElt::gen(a);
                    let eb = CentElt::gen(b);
                    ensure(
                        data.trace_term(&ea, &eb).is_zero(),
                        "τ must vanish for empty n",
                    )?;
                    let ja = c.red_block_state(&ea).unwrap();
                    let jb = c.red_block_state(&eb).unwrap();
                    let br = c.reduced_table().lambda_bracket(&ja, &jb).unwrap();
                    let mut want = LambdaPoly::zero(c.reduced_table());
                    want.add_term(0, c.red_block_state(&data.bracket(&ea, &eb)).unwrap());
                    want.add_term(
                        1,
                        VState::scalar(
                            c.reduced_table(),
                            KPoly::term(bilinear_form(data.lambda(), &ea, &eb), 1),
                        ),
                    );
                    ensure(
                        br == want,
                        format!("[J λ J] ≠ affine bracket at ({}, {})", a, b),
                    )?;
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_10_vertex_calculus_axioms() {
    criterion(10, "vertex-calculus axioms", || {
        for (lp, mp) in BRST_CONTEXTS {
            let data = ctx(lp, mp);
            let c = build_context(&data).unwrap();
            let report = run_axiom_suite(c.reduced_table(), 4, 200, 20260809).unwrap();
            ensure(
                report.pass(),
                format!("axiom suite failed for {:?}/{:?}: {}", lp, mp, report),
            )?;
            ensure(
                report.cases >= 200,
                "at least 200 randomized cases required",
            )?;
            // [h, a] = j_a a on the whole basis
            for &a in data.basis() {
                let ha = data.bracket(data.h(), &CentElt::gen(a));
                ensure(
                    ha == CentElt::gen(a).scale(&qi(data.deg_mu(a))),
                    format!("[h, {}] ≠ deg·{} in {:?}/{:?}", a, a, lp, mp),
                )?;
            }
        }
        Ok(())
    });
}
