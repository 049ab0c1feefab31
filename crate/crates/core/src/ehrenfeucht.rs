//! Bounded-depth type construction over a miniature model.
//!
//! Starting from a target prefix `X = X_0` coded by the identity `f_0`, each
//! stage builds the tuple tree `T` of prefix tuples `(f_0(c)↾ℓ, …, f_{k+1}(c)↾ℓ)`
//! realised by some `c < 2^a`, restricts it to the branch through
//! `X_0, …, X_k` to get a binary tree `T′`, and takes the leftmost depth-`d`
//! path of `T′` as `X_{k+1}`. The surviving candidates `c` are those whose
//! images code every `X_i` so far; the least survivor is the witness.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::binary::BinaryString;
use crate::error::{Error, Result};
use crate::model::{bits_of, encode_bits, mask, MiniModel, IDENTITY};

/// A finite prefix standing for a member of a Scott set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IdealElement(pub BinaryString);

impl IdealElement {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `X ⊕ Y = 2X ∪ (2Y + 1)` on equal-length prefixes.
    pub fn join(&self, other: &IdealElement) -> Result<IdealElement> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        let bits = self
            .0
            .bits()
            .iter()
            .zip(other.0.bits())
            .flat_map(|(&x, &y)| [x, y])
            .collect();
        Ok(IdealElement(BinaryString::from_bits(bits)))
    }

    /// Splits a join back into its even and odd halves.
    pub fn unjoin(&self) -> Result<(IdealElement, IdealElement)> {
        if !self.len().is_multiple_of(2) {
            return Err(Error::LengthMismatch(self.len(), self.len() + 1));
        }
        let bits = self.0.bits();
        let even = bits.iter().step_by(2).copied().collect();
        let odd = bits.iter().skip(1).step_by(2).copied().collect();
        Ok((
            IdealElement(BinaryString::from_bits(even)),
            IdealElement(BinaryString::from_bits(odd)),
        ))
    }
}

/// The tree `T` of equal-length prefix tuples with a nonempty witness set
/// `W(σ⃗)`, kept with the least witness of each tuple.
#[derive(Debug, Clone)]
pub struct TupleTree {
    funcs: Vec<String>,
    levels: Vec<BTreeMap<Vec<BinaryString>, u64>>,
}

impl TupleTree {
    pub fn arity(&self) -> usize {
        self.funcs.len()
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn contains(&self, tuple: &[BinaryString]) -> bool {
        self.witness(tuple).is_some()
    }

    pub fn witness(&self, tuple: &[BinaryString]) -> Option<u64> {
        let len = tuple.first().map_or(0, BinaryString::len);
        self.levels.get(len)?.get(tuple).copied()
    }

    pub fn level(&self, len: usize) -> impl Iterator<Item = &Vec<BinaryString>> {
        self.levels.get(len).into_iter().flat_map(|m| m.keys())
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(BTreeMap::len).collect()
    }
}

/// A binary tree given level by level, as a set of nodes up to `depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedTree {
    levels: Vec<BTreeSet<BinaryString>>,
}

impl DerivedTree {
    pub fn from_nodes<I: IntoIterator<Item = BinaryString>>(depth: usize, nodes: I) -> Self {
        let mut levels = vec![BTreeSet::new(); depth + 1];
        for n in nodes {
            if n.len() <= depth {
                levels[n.len()].insert(n);
            }
        }
        Self { levels }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn contains(&self, node: &BinaryString) -> bool {
        self.levels.get(node.len()).is_some_and(|l| l.contains(node))
    }

    pub fn level(&self, len: usize) -> impl Iterator<Item = &BinaryString> {
        self.levels.get(len).into_iter().flatten()
    }

    /// True when every level up to the depth has at least one node.
    pub fn reaches_full_depth(&self) -> bool {
        self.levels.iter().all(|l| !l.is_empty())
    }

    pub fn is_prefix_closed(&self) -> bool {
        self.levels
            .iter()
            .skip(1)
            .flatten()
            .all(|n| self.contains(&n.prefix(n.len() - 1).unwrap()))
    }
}

fn check_depth(model: &MiniModel, depth: usize) -> Result<()> {
    if depth > model.width() as usize {
        return Err(Error::Depth(format!(
            "depth {depth} exceeds width {}",
            model.width()
        )));
    }
    Ok(())
}

/// Builds `T` for `funcs` up to `depth`. Every `c < 2^a` contributes the
/// tuple of its images' prefixes at each length, which is exactly the set of
/// tuples with a nonempty `W(σ⃗)`.
pub fn build_tuple_tree(model: &MiniModel, funcs: &[&str], depth: usize, budget: u64) -> Result<TupleTree> {
    check_depth(model, depth)?;
    if funcs.first() != Some(&IDENTITY) {
        return Err(Error::Pattern(format!("the function list must start with `{IDENTITY}`")));
    }
    let ids = funcs
        .iter()
        .map(|f| model.resolve(f, 1))
        .collect::<Result<Vec<_>>>()?;
    let needed = model.domain_size() as u128 * (depth as u128 + 1);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut levels = vec![BTreeMap::new(); depth + 1];
    for c in 0..model.domain_size() {
        let images: Vec<u64> = ids.iter().map(|&id| model.apply_id(id, &[c])).collect();
        for (len, level) in levels.iter_mut().enumerate() {
            let tuple: Vec<BinaryString> = images.iter().map(|&v| bits_of(v, len)).collect();
            level.entry(tuple).or_insert(c);
        }
    }
    Ok(TupleTree {
        funcs: funcs.iter().map(ToString::to_string).collect(),
        levels,
    })
}

/// `T′`: the `τ` with `(X_0↾|τ|, …, X_k↾|τ|, τ) ∈ T`, up to `depth`.
pub fn derive_subtree(tree: &TupleTree, prefixes: &[IdealElement], depth: usize) -> Result<DerivedTree> {
    if prefixes.len() + 1 != tree.arity() {
        return Err(Error::LengthMismatch(prefixes.len() + 1, tree.arity()));
    }
    if depth > tree.depth() {
        return Err(Error::Depth(format!(
            "depth {depth} exceeds tree depth {}",
            tree.depth()
        )));
    }
    if let Some(short) = prefixes.iter().find(|x| x.len() < depth) {
        return Err(Error::Depth(format!(
            "prefix of length {} is shorter than depth {depth}",
            short.len()
        )));
    }
    let k = prefixes.len();
    let mut levels = vec![BTreeSet::new(); depth + 1];
    for (len, level) in levels.iter_mut().enumerate() {
        let fixed: Vec<BinaryString> = prefixes.iter().map(|x| x.0.prefix(len).unwrap()).collect();
        for tuple in tree.level(len) {
            if tuple[..k] == fixed[..] {
                level.insert(tuple[k].clone());
            }
        }
    }
    Ok(DerivedTree { levels })
}

/// The leftmost string of length `depth` all of whose prefixes are nodes.
pub fn find_path(tree: &DerivedTree, depth: usize) -> Result<BinaryString> {
    fn walk(tree: &DerivedTree, node: &mut BinaryString, depth: usize) -> bool {
        if !tree.contains(node) {
            return false;
        }
        if node.len() == depth {
            return true;
        }
        for bit in [false, true] {
            node.push(bit);
            if walk(tree, node, depth) {
                return true;
            }
            *node = node.prefix(node.len() - 1).unwrap();
        }
        false
    }
    if depth > tree.depth() {
        return Err(Error::NoPath(depth));
    }
    let mut node = BinaryString::empty();
    if walk(tree, &mut node, depth) {
        Ok(node)
    } else {
        Err(Error::NoPath(depth))
    }
}

/// A constraint `(f(x))_n = v` of a type fragment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitConstraint {
    pub function: String,
    pub bit: usize,
    pub value: bool,
}

/// `p_k(x)` restricted to the first `depth` bits: `x < 2^a` is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeFragment {
    pub depth: usize,
    pub constraints: Vec<BitConstraint>,
}

impl TypeFragment {
    pub fn holds(&self, model: &MiniModel, c: u64) -> Result<bool> {
        for k in &self.constraints {
            let v = model.apply(&k.function, &[c])?;
            if (model.bit(v, k.bit as u32) == 1) != k.value {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    /// `f_{k+1}`.
    pub function: String,
    /// Number of tuples of `T` at each length.
    pub tuple_tree_sizes: Vec<usize>,
    pub derived: DerivedTree,
    pub derived_full_depth: bool,
    /// `X_{k+1}`.
    pub path: BinaryString,
    pub candidates_before: u64,
    pub candidates_after: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EhrenfeuchtRun {
    pub width: u32,
    pub depth: usize,
    pub functions: Vec<String>,
    /// `X_0, …, X_K`.
    pub prefixes: Vec<BinaryString>,
    pub initial_candidates: u64,
    pub stages: Vec<Stage>,
    pub fragment: TypeFragment,
    pub witness: u64,
}

impl EhrenfeuchtRun {
    /// `decode_prefix(f_i(c), d) = X_i` for every `i`.
    pub fn witness_codes_prefixes(&self, model: &MiniModel) -> Result<bool> {
        for (f, x) in self.functions.iter().zip(&self.prefixes) {
            let v = model.apply(f, &[self.witness])?;
            if model.decode_prefix(v, self.depth)? != *x {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Runs the stage loop for `funcs = (f_0, …, f_K)` from the target `x`.
pub fn run_ehrenfeucht(
    model: &MiniModel,
    funcs: &[&str],
    x: &IdealElement,
    depth: usize,
    budget: u64,
) -> Result<EhrenfeuchtRun> {
    check_depth(model, depth)?;
    if funcs.first() != Some(&IDENTITY) {
        return Err(Error::Pattern(format!("the function list must start with `{IDENTITY}`")));
    }
    if x.len() < depth {
        return Err(Error::Depth(format!(
            "target of length {} is shorter than depth {depth}",
            x.len()
        )));
    }
    let ids = funcs
        .iter()
        .map(|f| model.resolve(f, 1))
        .collect::<Result<Vec<_>>>()?;
    let low = mask(depth as u32);

    let x0 = x.0.prefix(depth)?;
    let mut prefixes = vec![IdealElement(x0.clone())];
    let mut fragment = TypeFragment {
        depth,
        constraints: constraints_for(IDENTITY, &x0),
    };
    let target = encode_bits(&x0);
    let mut candidates: Vec<u64> = (0..model.domain_size()).filter(|&c| c & low == target).collect();
    let initial_candidates = candidates.len() as u64;

    let mut stages = Vec::new();
    for k in 1..funcs.len() {
        let tree = build_tuple_tree(model, &funcs[..=k], depth, budget)?;
        let derived = derive_subtree(&tree, &prefixes, depth)?;
        let path = find_path(&derived, depth)?;
        let code = encode_bits(&path);
        let before = candidates.len() as u64;
        candidates.retain(|&c| model.apply_id(ids[k], &[c]) & low == code);
        fragment.constraints.extend(constraints_for(funcs[k], &path));
        stages.push(Stage {
            function: funcs[k].to_string(),
            tuple_tree_sizes: tree.level_sizes(),
            derived_full_depth: derived.reaches_full_depth(),
            derived,
            path: path.clone(),
            candidates_before: before,
            candidates_after: candidates.len() as u64,
        });
        prefixes.push(IdealElement(path));
    }

    let witness = *candidates
        .first()
        .ok_or_else(|| Error::Realizability("no element realizes the final fragment".into()))?;
    Ok(EhrenfeuchtRun {
        width: model.width(),
        depth,
        functions: funcs.iter().map(ToString::to_string).collect(),
        prefixes: prefixes.into_iter().map(|p| p.0).collect(),
        initial_candidates,
        stages,
        fragment,
        witness,
    })
}

fn constraints_for(function: &str, prefix: &BinaryString) -> Vec<BitConstraint> {
    prefix
        .bits()
        .iter()
        .enumerate()
        .map(|(bit, &value)| BitConstraint {
            function: function.to_string(),
            bit,
            value,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    fn ie(s: &str) -> IdealElement {
        IdealElement(bs(s))
    }

    const BUDGET: u64 = 1 << 24;

    #[test]
    fn join_examples() {
        assert_eq!(ie("10").join(&ie("01")).unwrap(), ie("1001"));
        assert_eq!(ie("11").join(&ie("11")).unwrap(), ie("1111"));
        assert_eq!(ie("00").join(&ie("11")).unwrap(), ie("0101"));
        assert!(matches!(ie("1").join(&ie("10")), Err(Error::LengthMismatch(1, 2))));
        assert_eq!(ie("1001").unjoin().unwrap(), (ie("10"), ie("01")));
    }

    #[test]
    fn tuple_tree_examples() {
        let m = MiniModel::new(3).unwrap();
        let t = build_tuple_tree(&m, &["f0"], 1, BUDGET).unwrap();
        assert_eq!(t.witness(&[bs("0")]), Some(0));
        assert_eq!(t.witness(&[bs("1")]), Some(1));

        let t = build_tuple_tree(&m, &["f0", "f0"], 1, BUDGET).unwrap();
        assert!(t.contains(&[bs("0"), bs("0")]));
        assert!(t.contains(&[bs("1"), bs("1")]));
        assert!(!t.contains(&[bs("0"), bs("1")]));
        assert!(!t.contains(&[bs("1"), bs("0")]));
        assert!(t.contains(&[bs(""), bs("")]));

        assert!(matches!(build_tuple_tree(&m, &["f0"], 4, BUDGET), Err(Error::Depth(_))));
        assert!(matches!(build_tuple_tree(&m, &["f0"], 3, 10), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn tuple_tree_matches_witness_w() {
        let m = MiniModel::with_library(4, "succ/1 = a1 + 1\nsq/1 = a1 * a1").unwrap();
        let funcs = ["f0", "sq", "succ"];
        let t = build_tuple_tree(&m, &funcs, 3, BUDGET).unwrap();
        for len in 0..=3u32 {
            for a in BinaryString::all_of_length(len) {
                for b in BinaryString::all_of_length(len) {
                    for c in BinaryString::all_of_length(len) {
                        let tuple = [a.clone(), b.clone(), c.clone()];
                        assert_eq!(t.witness(&tuple), m.witness_w(&tuple, &funcs).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn derived_tree_examples() {
        let m = MiniModel::new(3).unwrap();
        let t = build_tuple_tree(&m, &["f0", "f0"], 2, BUDGET).unwrap();
        let d = derive_subtree(&t, &[ie("10")], 2).unwrap();
        assert_eq!(d.level(1).cloned().collect::<Vec<_>>(), vec![bs("1")]);
        assert!(d.is_prefix_closed());

        let only_id = build_tuple_tree(&m, &["f0"], 3, BUDGET).unwrap();
        let full = derive_subtree(&only_id, &[], 3).unwrap();
        assert_eq!(full.level(3).count(), 8);

        // a constant function pins the second coordinate at every level
        let cm = MiniModel::with_library(3, "one/1 = 1").unwrap();
        let t = build_tuple_tree(&cm, &["f0", "one"], 2, BUDGET).unwrap();
        let d = derive_subtree(&t, &[ie("00")], 2).unwrap();
        assert_eq!(d.level(1).cloned().collect::<Vec<_>>(), vec![bs("1")]);
        // a tuple tree never contains inconsistent prefixes at level 1
        let inconsistent = DerivedTree::from_nodes(2, [bs("")]);
        assert_eq!(inconsistent.level(1).count(), 0);

        assert!(matches!(derive_subtree(&t, &[ie("0")], 2), Err(Error::Depth(_))));
        assert!(matches!(derive_subtree(&t, &[], 2), Err(Error::LengthMismatch(..))));
    }

    #[test]
    fn find_path_examples() {
        let full = DerivedTree::from_nodes(3, (0..=3).flat_map(BinaryString::all_of_length));
        assert_eq!(find_path(&full, 3).unwrap(), bs("000"));
        let spine = DerivedTree::from_nodes(3, ["", "1", "11", "111"].map(bs));
        assert_eq!(find_path(&spine, 3).unwrap(), bs("111"));
        let stunted = DerivedTree::from_nodes(2, ["", "0", "1"].map(bs));
        assert_eq!(find_path(&stunted, 2), Err(Error::NoPath(2)));
        // dead ends on the left are skipped
        let dead_end = DerivedTree::from_nodes(3, ["", "0", "00", "1", "10", "101"].map(bs));
        assert_eq!(find_path(&dead_end, 3).unwrap(), bs("101"));
    }

    #[test]
    fn run_examples() {
        let m = MiniModel::new(4).unwrap();
        let run = run_ehrenfeucht(&m, &["f0"], &ie("1010"), 4, BUDGET).unwrap();
        assert_eq!(run.witness, 5);
        assert_eq!(run.prefixes, vec![bs("1010")]);

        let m = MiniModel::with_library(4, "succ/1 = a1 + 1").unwrap();
        let run = run_ehrenfeucht(&m, &["f0", "succ"], &ie("1010"), 4, BUDGET).unwrap();
        assert_eq!(run.witness, 5);
        assert_eq!(run.prefixes[1], bs("0110"));
        assert!(run.witness_codes_prefixes(&m).unwrap());
        assert!(run.stages[0].derived_full_depth);
        for c in 0..16 {
            assert_eq!(run.fragment.holds(&m, c).unwrap(), c == 5);
        }

        assert!(matches!(
            run_ehrenfeucht(&m, &["f0"], &ie("10101"), 5, BUDGET),
            Err(Error::Depth(_))
        ));
        assert!(matches!(
            run_ehrenfeucht(&m, &["succ"], &ie("1010"), 4, BUDGET),
            Err(Error::Pattern(_))
        ));
    }
}
