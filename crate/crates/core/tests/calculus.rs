use std::collections::BTreeSet;

use scottlab_core::{BinaryString, Formula};

const TEMPLATES: &[&str] = &[
    "(x[A])#0 = 1",
    "!(succ(x[A]) < 3)",
    "x[A] < x[B]",
    "(x[A])#1 != (succ(x[B]))#1 | x[A] = 0",
    "add(x[A], x[B]) = x[C]",
    "x[A] < x[B] & !(x[B] = x[C])",
];

fn instances(level: u32) -> Vec<Formula> {
    let labels: Vec<BinaryString> = BinaryString::all_of_length(level).collect();
    let mut out = BTreeSet::new();
    for t in TEMPLATES {
        for a in &labels {
            for b in &labels {
                for c in &labels {
                    let text = t
                        .replace("x[A]", &format!("x[{a}]"))
                        .replace("x[B]", &format!("x[{b}]"))
                        .replace("x[C]", &format!("x[{c}]"));
                    out.insert(text.parse::<Formula>().unwrap());
                }
            }
        }
    }
    out.into_iter().collect()
}

#[test]
fn ramifications_reduce_back() {
    for n in 0..=2usize {
        for phi in instances(n as u32) {
            let k = phi.variables().len() as u32;
            assert_eq!(phi.reduct(n).unwrap(), phi);
            assert_eq!(phi.ramifications(n, n).unwrap(), BTreeSet::from([phi.clone()]));
            for ext in 1..=2usize {
                let rams = phi.ramifications(n, n + ext).unwrap();
                assert_eq!(rams.len(), (1usize << ext).pow(k), "{phi}");
                for psi in &rams {
                    assert_eq!(psi.reduct(n).unwrap(), phi, "{psi}");
                    assert_eq!(psi.level().unwrap(), Some(n + ext));
                }
            }
        }
    }
}

#[test]
fn ramification_composes() {
    for n in 0..=1usize {
        for phi in instances(n as u32) {
            let direct = phi.ramifications(n, n + 2).unwrap();
            let mut staged = BTreeSet::new();
            for chi in phi.ramifications(n, n + 1).unwrap() {
                staged.extend(chi.ramifications(n + 1, n + 2).unwrap());
            }
            assert_eq!(direct, staged, "{phi}");
        }
    }
}

#[test]
fn reducts_compose() {
    for phi in instances(2) {
        for m in 0..=2 {
            for l in 0..=m {
                assert_eq!(phi.reduct(m).unwrap().reduct(l).unwrap(), phi.reduct(l).unwrap());
            }
        }
    }
}

#[test]
fn reduct_rejects_longer_targets() {
    let phi: Formula = "x[0] < x[1]".parse().unwrap();
    assert!(phi.reduct(2).is_err());
    assert!(phi.ramifications(2, 3).is_err());
}
