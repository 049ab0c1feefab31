use std::fmt;

/// A named primitive usable as a library function body via
/// `name/arity = builtin <builtin>`.
pub struct Builtin {
    pub name: &'static str,
    pub arity: usize,
    /// Called with arguments already in the domain; the result is masked
    /// to the width by the caller.
    pub eval: fn(&[u64], u32) -> u64,
}

impl fmt::Debug for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "builtin {}/{}", self.name, self.arity)
    }
}

impl PartialEq for Builtin {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Builtin {}

fn rotl(args: &[u64], w: u32) -> u64 {
    let x = args[0];
    (x << 1) | (x >> (w - 1) & 1)
}

fn rotr(args: &[u64], w: u32) -> u64 {
    let x = args[0];
    (x >> 1) | ((x & 1) << (w - 1))
}

pub static BUILTINS: &[Builtin] = &[
    Builtin { name: "complement", arity: 1, eval: |a, _| !a[0] },
    Builtin { name: "rotl", arity: 1, eval: rotl },
    Builtin { name: "rotr", arity: 1, eval: rotr },
    Builtin { name: "reverse", arity: 1, eval: |a, w| a[0].reverse_bits() >> (64 - w) },
    Builtin { name: "popcount", arity: 1, eval: |a, _| a[0].count_ones() as u64 },
    Builtin { name: "xor", arity: 2, eval: |a, _| a[0] ^ a[1] },
    Builtin { name: "and", arity: 2, eval: |a, _| a[0] & a[1] },
    Builtin { name: "or", arity: 2, eval: |a, _| a[0] | a[1] },
    Builtin { name: "min", arity: 2, eval: |a, _| a[0].min(a[1]) },
    Builtin { name: "max", arity: 2, eval: |a, _| a[0].max(a[1]) },
];

pub fn lookup(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str, args: &[u64], w: u32) -> u64 {
        (lookup(name).unwrap().eval)(args, w) & ((1 << w) - 1)
    }

    #[test]
    fn bit_permutations() {
        assert_eq!(run("rotl", &[0b1000], 4), 0b0001);
        assert_eq!(run("rotr", &[0b0001], 4), 0b1000);
        assert_eq!(run("reverse", &[0b0011], 4), 0b1100);
        assert_eq!(run("complement", &[0b0011], 4), 0b1100);
        for x in 0..16 {
            assert_eq!(run("rotr", &[run("rotl", &[x], 4)], 4), x);
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = BUILTINS.iter().map(|b| b.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), BUILTINS.len());
    }
}
