//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the summary is printed on every run.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qss_core::access::{all_structures, all_subsets, threshold};
use qss_core::entropy::{maximal_chains, profile_for, verify_monotonicity, Scheme, SecretSpec};
use qss_core::msp::{
    build_normal_form, lemma2_case, rank_bookkeeping, structural_check, to_css, NormalForm,
};
use qss_core::oracle::{basis_string, encode_secret, QuantumScheme, DEFAULT_AMPLITUDE_CAP};
use qss_core::{AccessStructure, FieldMatrix, PlayerSet, PrimeField};

const CAP: u128 = DEFAULT_AMPLITUDE_CAP;
const ORACLE_TOLERANCE: f64 = 1e-8;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Outcome,
}

fn field(q: u64) -> PrimeField {
    PrimeField::new(q).unwrap()
}

fn structure(n: usize, sets: &[&[usize]]) -> AccessStructure {
    AccessStructure::from_minimal_sets(n, sets.iter().map(|s| s.to_vec()).collect()).unwrap()
}

fn triangle() -> AccessStructure {
    structure(3, &[&[1, 2], &[2, 3], &[3, 1]])
}

fn vee() -> AccessStructure {
    structure(3, &[&[1, 2], &[1, 3]])
}

fn four_player() -> AccessStructure {
    structure(4, &[&[1, 4], &[2, 4], &[3, 4], &[1, 2, 3]])
}

fn set(players: &[usize]) -> PlayerSet {
    PlayerSet::from_players(players, 63).unwrap()
}

/// Uniform plus one biased distribution with full support.
fn secrets(q: u64) -> Vec<SecretSpec> {
    let f = field(q);
    let biased = match q {
        2 => "0.9,0.1",
        3 => "0.5,0.3,0.2",
        _ => unreachable!(),
    };
    vec![
        SecretSpec::uniform(f),
        SecretSpec::parse(f, biased).unwrap(),
    ]
}

fn connected_self_dual(max_n: usize) -> Vec<AccessStructure> {
    (1..=max_n)
        .flat_map(all_structures)
        .filter(|g| g.is_connected() && g.is_self_dual())
        .collect()
}

fn realizable_connected(max_n: usize) -> Vec<AccessStructure> {
    (1..=max_n)
        .flat_map(all_structures)
        .filter(|g| g.is_connected() && g.is_quantum_realizable())
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn normal_form_reproduction() -> Outcome {
    let nf = build_normal_form(&triangle(), field(2)).map_err(|e| e.to_string())?;
    let signed: Vec<Vec<i64>> = vec![
        vec![0, 1, 0, 0],
        vec![1, -1, 0, 0],
        vec![0, 0, 1, 0],
        vec![1, 0, -1, 0],
        vec![0, 0, 0, 1],
        vec![1, 0, 0, -1],
    ];
    let expected = FieldMatrix::from_signed_rows(field(2), 4, &signed).unwrap();
    ensure(nf.program.matrix() == &expected, || {
        format!("matrix differs:\n{}", nf.program.matrix())
    })?;
    let psi = nf.program.psi().to_vec();
    ensure(psi == vec![1, 2, 2, 3, 3, 1], || format!("psi = {psi:?}"))?;
    Ok("6x4 matrix exact; psi = (1,2,2,3,3,1). Known discrepancy: the appendix text gives psi(3)=1, \
        but row 3 is the identity row of block {2,3}, so the labeling rule gives psi(3)=2"
        .into())
}

fn support_set(q: u64, s: u64) -> Result<(BTreeSet<String>, f64), String> {
    let nf = build_normal_form(&triangle(), field(q)).map_err(|e| e.to_string())?;
    let state = encode_secret(&nf.program, s, CAP).map_err(|e| e.to_string())?;
    let support = state.support();
    let worst = support
        .iter()
        .map(|&i| {
            (state.amplitudes()[i].re - 1.0 / 8f64.sqrt()).abs() + state.amplitudes()[i].im.abs()
        })
        .fold(0.0, f64::max);
    Ok((state.support_strings().into_iter().collect(), worst))
}

fn encoding_reproduction() -> Outcome {
    let listed: [&[&str]; 2] = [
        &[
            "000000", "110000", "001100", "000011", "111100", "110011", "001111", "111111",
        ],
        &[
            "101010", "011010", "100110", "101001", "011110", "011001", "100101", "010101",
        ],
    ];
    let mut problems = Vec::new();
    for (s, list) in listed.iter().enumerate() {
        let (got, worst) = support_set(2, s as u64)?;
        let want: BTreeSet<String> = list.iter().map(|x| x.to_string()).collect();
        if worst > 1e-10 {
            problems.push(format!("s={s}: amplitude off 1/sqrt(8) by {worst:e}"));
        }
        if got != want {
            let missing: Vec<_> = want.difference(&got).collect();
            let extra: Vec<_> = got.difference(&want).collect();
            problems.push(format!(
                "s={s}: listed but not encoded {missing:?}; encoded but not listed {extra:?}"
            ));
        }
    }
    if problems.is_empty() {
        Ok("both 8-term superpositions match with amplitude 1/sqrt(8)".into())
    } else {
        Err(problems.join("; ")
            + " (011110 has coordinate pair 11 in block {2,3}, which no codeword can have)")
    }
}

fn oracle_agrees_with_formula() -> Outcome {
    let cases = [
        ("triangle", triangle()),
        ("purified {{1,2},{1,3}}", vee()),
        ("n=4 self-dual", four_player()),
    ];
    let mut checked = 0;
    for (label, g) in &cases {
        let scheme = Scheme::new(g, field(2)).map_err(|e| e.to_string())?;
        for secret in secrets(2) {
            let quantum =
                QuantumScheme::from_scheme(&scheme, &secret, CAP).map_err(|e| e.to_string())?;
            let cmp = quantum
                .compare_with_formula(&scheme)
                .map_err(|e| e.to_string())?;
            ensure(cmp.discrepancies.is_empty(), || {
                format!(
                    "{label}, secret {:?}: {:?}",
                    secret.distribution(),
                    cmp.discrepancies
                )
            })?;
            checked += cmp.rows.len();
        }
    }
    Ok(format!("{checked} subset entropies agree within 1e-6 bits"))
}

fn appendix_adjudication() -> Outcome {
    let mut lines = Vec::new();
    for q in [2u64, 3] {
        let log_q = (q as f64).log2();
        let scheme = Scheme::new(&triangle(), field(q)).map_err(|e| e.to_string())?;
        for secret in secrets(q) {
            let h = secret.entropy_bits();
            let quantum =
                QuantumScheme::from_scheme(&scheme, &secret, CAP).map_err(|e| e.to_string())?;
            let oracle = |a: PlayerSet| quantum.subset_entropy(a).map_err(|e| e.to_string());
            let expect = [
                (PlayerSet::EMPTY, 0.0, "S({}) = 0"),
                (set(&[1]), 2.0 * log_q, "S({1}) = 2 log2 q"),
                (set(&[1, 2]), 2.0 * log_q + h, "S({1,2}) = 2 log2 q + S(S)"),
                (set(&[1, 2, 3]), h, "S(P) = S(S)"),
            ];
            for (a, want, what) in expect {
                let got = oracle(a)?;
                ensure((got - want).abs() <= ORACLE_TOLERANCE, || {
                    format!(
                        "q={q}, secret {:?}: {what} expected {want}, oracle {got}",
                        secret.distribution()
                    )
                })?;
            }
            let appendix_single = oracle(set(&[1]))? - log_q;
            let appendix_pair = oracle(set(&[1, 2]))? - (h + log_q);
            ensure(appendix_single > 0.5 && appendix_pair > 0.5, || {
                format!("q={q}: oracle unexpectedly agrees with the appendix values")
            })?;
        }
        lines.push(format!("q={q}"));
    }
    Ok(format!(
        "{}: oracle gives S({{1}}) = 2 log2 q and S({{1,2}}) = 2 log2 q + S(S); the appendix's \
         log2 q and S(S) + log2 q are off by log2 q (player 1 holds rows 1 and 6). S({{}}) = 0 and \
         S(P) = S(S) agree with the appendix",
        lines.join(", ")
    ))
}

fn theorem_exhaustive() -> Outcome {
    let mut structures = connected_self_dual(4);
    let enumerated = structures.len();
    structures.push(threshold(3, 5).unwrap());
    let mut runs = 0;
    for q in [2u64, 3] {
        for g in &structures {
            for secret in secrets(q) {
                let violations = verify_monotonicity(g, &secret).map_err(|e| e.to_string())?;
                ensure(violations.is_empty(), || {
                    format!("q={q}, {}: {} violations", g.to_json(), violations.len())
                })?;
                runs += 1;
            }
        }
    }
    Ok(format!(
        "{enumerated} connected self-dual structures on n <= 4 plus (3,5)-threshold, q in {{2,3}}: \
         {runs} sweeps, zero violations"
    ))
}

fn lemma2_triples(nf: &NormalForm) -> Result<usize, String> {
    let g = &nf.structure;
    let n = g.n();
    let mut triples = 0;
    for a in all_subsets(n) {
        for p in 1..=n {
            if a.contains(p) || !g.authorizes(a.with(p).complement(n)) {
                continue;
            }
            let book = rank_bookkeeping(nf, a, p).map_err(|e| e.to_string())?;
            ensure(book.identities_hold(), || {
                format!("rank bookkeeping fails at A={a}, p={p}: {book:?}")
            })?;
            for &ai in g.minimal_masks().iter().filter(|m| m.contains(p)) {
                let report = lemma2_case(nf, a, p, ai).map_err(|e| e.to_string())?;
                ensure(report.matches_prediction, || {
                    format!("A={a}, p={p}, A_i={ai}: {report:?}")
                })?;
                triples += 1;
            }
        }
    }
    Ok(triples)
}

fn lemma2_and_bookkeeping() -> Outcome {
    let tri = build_normal_form(&triangle(), field(2)).map_err(|e| e.to_string())?;
    let purified = Scheme::new(&vee(), field(2)).map_err(|e| e.to_string())?;
    let t = lemma2_triples(&tri)?;
    let p = lemma2_triples(purified.normal_form())?;
    ensure(t > 0 && p > 0, || "no admissible triples found".into())?;
    Ok(format!(
        "{t} triangle triples and {p} purified-example triples match; rank identities exact"
    ))
}

fn tent_profiles() -> Outcome {
    let mut chains = 0;
    for (g, self_dual) in [(triangle(), true), (vee(), false)] {
        let scheme = Scheme::new(&g, field(2)).map_err(|e| e.to_string())?;
        for secret in secrets(2) {
            for chain in maximal_chains(3) {
                let profile = profile_for(&scheme, &secret, &chain).map_err(|e| e.to_string())?;
                let e = profile.entropies();
                if self_dual {
                    ensure(
                        profile.rises_then_falls() && profile.single_crossover(),
                        || format!("not a tent: {e:?}"),
                    )?;
                }
                ensure(profile.endpoints_hold(), || {
                    format!("endpoints fail: {e:?}, S(S) = {}", secret.entropy_bits())
                })?;
                chains += 1;
            }
        }
    }
    Ok(format!(
        "{chains} chain profiles: triangle tents end at (0, S(S)); the non-self-dual example ends at or above S(S)"
    ))
}

fn secrecy_recoverability() -> Outcome {
    let mut cases: Vec<(AccessStructure, u64)> = Vec::new();
    for q in [2u64, 3] {
        cases.push((triangle(), q));
        cases.push((vee(), q));
        cases.push((four_player(), q));
    }
    for g in connected_self_dual(4) {
        cases.push((g, 2));
    }
    let mut sets = 0;
    for (g, q) in &cases {
        let scheme = Scheme::new(g, field(*q)).map_err(|e| e.to_string())?;
        for secret in secrets(*q) {
            let quantum =
                QuantumScheme::from_scheme(&scheme, &secret, CAP).map_err(|e| e.to_string())?;
            let report = quantum
                .verify_secrecy_recoverability(&scheme, CAP)
                .map_err(|e| e.to_string())?;
            ensure(report.secrecy_ok() && report.recoverability_ok(), || {
                format!("q={q}, {}: {report:?}", g.to_json())
            })?;
            sets += report.authorized_checked + report.unauthorized_checked;
        }
    }
    Ok(format!(
        "{} structure/field cases, {sets} subset checks below 1e-9",
        cases.len()
    ))
}

fn digits(v: &[u64]) -> String {
    v.iter()
        .map(|x| char::from_digit(*x as u32, 36).unwrap())
        .collect()
}

fn css_equivalence() -> Outcome {
    let mut programs: Vec<(AccessStructure, u64)> = Vec::new();
    for q in [2u64, 3] {
        programs.extend(realizable_connected(3).into_iter().map(|g| (g, q)));
        programs.push((four_player(), q));
    }
    programs.extend(connected_self_dual(4).into_iter().map(|g| (g, 2)));
    for (g, q) in &programs {
        let scheme = Scheme::new(g, field(*q)).map_err(|e| e.to_string())?;
        let nf = scheme.normal_form();
        let css = to_css(nf);
        for s in 0..*q {
            let coset = css.coset(s);
            ensure(nf.program.codewords(s) == coset, || {
                format!(
                    "q={q}, {}: codewords differ from the coset for s={s}",
                    g.to_json()
                )
            })?;
            let state = encode_secret(&nf.program, s, CAP).map_err(|e| e.to_string())?;
            let support: BTreeSet<String> = state.support_strings().into_iter().collect();
            let expected: BTreeSet<String> = coset.iter().map(|v| digits(v)).collect();
            ensure(support == expected, || {
                format!(
                    "q={q}, {}: simulated support differs for s={s}",
                    g.to_json()
                )
            })?;
            let amplitude = 1.0 / (coset.len() as f64).sqrt();
            let d = nf.program.matrix().rows();
            ensure(
                state.support().iter().all(|&i| {
                    (state.amplitudes()[i].re - amplitude).abs() < 1e-12
                        && basis_string(*q, d, i).len() == d
                }),
                || format!("q={q}, {}: amplitudes not uniform", g.to_json()),
            )?;
        }
    }
    Ok(format!(
        "{} programs: enumeration, CSS coset and simulated support coincide",
        programs.len()
    ))
}

fn structural_properties() -> Outcome {
    let mut structures = realizable_connected(4);
    structures.push(threshold(3, 5).unwrap());
    let mut programs = 0;
    for q in [2u64, 3] {
        for g in &structures {
            let direct = build_normal_form(g, field(q)).map_err(|e| e.to_string())?;
            let scheme = Scheme::new(g, field(q)).map_err(|e| e.to_string())?;
            for nf in [&direct, scheme.normal_form()] {
                let report = structural_check(&nf.program, &nf.layout);
                ensure(report.all_pass(), || {
                    format!("q={q}, {}: {report:?}", nf.structure.to_json())
                })?;
                let dispensable = nf.program.dispensable_rows(&nf.structure);
                ensure(dispensable.is_empty(), || {
                    format!(
                        "q={q}, {}: dispensable rows {dispensable:?}",
                        nf.structure.to_json()
                    )
                })?;
                programs += 1;
            }
        }
    }
    Ok(format!(
        "{programs} normal-form programs pass (i)-(iv) with no dispensable rows"
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "normal-form reproduction",
            limit: Some(Duration::from_secs(1)),
            check: normal_form_reproduction,
        },
        Criterion {
            id: 2,
            name: "encoding reproduction",
            limit: Some(Duration::from_secs(1)),
            check: encoding_reproduction,
        },
        Criterion {
            id: 3,
            name: "rank formula vs oracle",
            limit: Some(Duration::from_secs(30)),
            check: oracle_agrees_with_formula,
        },
        Criterion {
            id: 4,
            name: "appendix-value adjudication",
            limit: None,
            check: appendix_adjudication,
        },
        Criterion {
            id: 5,
            name: "monotonicity, exhaustive",
            limit: Some(Duration::from_secs(60)),
            check: theorem_exhaustive,
        },
        Criterion {
            id: 6,
            name: "dependence cases and rank bookkeeping",
            limit: Some(Duration::from_secs(10)),
            check: lemma2_and_bookkeeping,
        },
        Criterion {
            id: 7,
            name: "tent profiles",
            limit: Some(Duration::from_secs(5)),
            check: tent_profiles,
        },
        Criterion {
            id: 8,
            name: "secrecy and recoverability",
            limit: None,
            check: secrecy_recoverability,
        },
        Criterion {
            id: 9,
            name: "CSS equivalence",
            limit: None,
            check: css_equivalence,
        },
        Criterion {
            id: 10,
            name: "structural properties",
            limit: None,
            check: structural_properties,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.check)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, c.limit) {
            if elapsed > limit {
                outcome = Err(format!(
                    "took {:.2} s, limit {} s",
                    elapsed.as_secs_f64(),
                    limit.as_secs()
                ));
            }
        }
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} [{:>2}] {} ({:.3} s): {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
