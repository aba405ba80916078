//! Built-in instance families: the Rackoff counterexample, the BPP power
//! nets and the Ackermann nets.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::net::{named_marking, NetBuilder, NetInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("infeasible parameters for {family}: {reason}")]
    InfeasibleParams { family: &'static str, reason: String },
}

/// A family name with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyParams {
    RackoffCe,
    BppPower { n: u32 },
    Ackermann { n: u32, x: u64 },
}

impl FamilyParams {
    pub fn generate(self) -> Result<NetInstance, GeneratorError> {
        match self {
            FamilyParams::RackoffCe => Ok(gen_rackoff_ce()),
            FamilyParams::BppPower { n } => {
                if n > 64 {
                    return Err(GeneratorError::InfeasibleParams {
                        family: "bpp-power",
                        reason: format!("2^{n} tokens"),
                    });
                }
                Ok(gen_bpp_power(n))
            }
            FamilyParams::Ackermann { n, x } => gen_ackermann(n, x),
        }
    }
}

/// Places run, temp, stop; `L = a⁺b ∪ a*c`.
pub fn gen_rackoff_ce() -> NetInstance {
    let net = NetBuilder::default()
        .letters(["a", "b", "c"])
        .places(["run", "temp", "stop"])
        .transition("rt_help", Some("a"), [("run", 1u32)], [("run", 1u32), ("temp", 1)])
        .transition("rt_b", Some("b"), [("run", 1u32), ("temp", 1)], [("stop", 1u32)])
        .transition("rt_a", Some("c"), [("run", 1u32)], [("stop", 1u32)])
        .build()
        .expect("static net");
    NetInstance::with_named_markings(net, &[("run", 1)], &[("stop", 1)]).expect("static markings")
}

/// The BPP net with `L = {a^(2^n)}`. The initial token sits on `p0`.
pub fn gen_bpp_power(n: u32) -> NetInstance {
    let tokens = BigUint::one() << n;
    let net = NetBuilder::default()
        .letter("a")
        .places(["p0", "p1", "pf"])
        .transition("t", None, [("p0", BigUint::one())], [("p1", tokens.clone())])
        .transition("ta", Some("a"), [("p1", BigUint::one())], [("pf", BigUint::one())])
        .build()
        .expect("static net");
    let m0 = named_marking(&net, &[("p0", 1)]).expect("declared place");
    let mut mf = named_marking(&net, &[]).expect("zero marking");
    mf.set(net.place_index("pf").expect("declared place"), tokens);
    NetInstance::new(net, m0, mf).expect("markings sized by the net")
}

fn ackermann_guard(n: u32, x: u64) -> Result<(), GeneratorError> {
    if n >= 3 && x >= 2 || n >= 4 {
        return Err(GeneratorError::InfeasibleParams {
            family: "ackermann",
            reason: format!("A_{n}({x}) is too large to explore"),
        });
    }
    Ok(())
}

/// The net `N(n)` started with `x` tokens on `in^n`, whose language is
/// `{a^k | k ≤ A_n(x)}`.
pub fn gen_ackermann(n: u32, x: u64) -> Result<NetInstance, GeneratorError> {
    ackermann_guard(n, x)?;
    let mut b = NetBuilder::default().letter("a");
    let name = |base: &str, i: u32| format!("{base}{i}");
    // level 0
    for base in ["start", "in", "copy", "out", "stop"] {
        b = b.place(&name(base, 0));
    }
    b = b
        .transition("t_start0", None, [("start0", 1u32)], [("copy0", 1u32)])
        .transition(
            "t_copy0",
            None,
            [("in0", 1u32), ("copy0", 1)],
            [("out0", 1u32), ("copy0", 1)],
        )
        .transition("t_stop0", None, [("copy0", 1u32)], [("stop0", 1u32), ("out0", 1)]);
    for i in 1..=n {
        let lo = i - 1;
        for base in ["start", "in", "copy", "out", "stop", "swap", "tmp"] {
            b = b.place(&name(base, i));
        }
        let (start_hi, in_hi, out_hi, stop_hi, swap, tmp) = (
            name("start", i),
            name("in", i),
            name("out", i),
            name("stop", i),
            name("swap", i),
            name("tmp", i),
        );
        let (start_lo, in_lo, out_lo, stop_lo) = (name("start", lo), name("in", lo), name("out", lo), name("stop", lo));
        b = b
            .transition(
                &name("t_start", i),
                None,
                [(start_hi.as_str(), 1u32)],
                [(in_lo.as_str(), 1u32), (start_lo.as_str(), 1)],
            )
            .transition(
                &name("t_in", i),
                None,
                [(in_hi.as_str(), 1u32), (stop_lo.as_str(), 1)],
                [(swap.as_str(), 1u32)],
            )
            .transition(
                &name("t_swap", i),
                None,
                [(swap.as_str(), 1u32), (out_lo.as_str(), 1)],
                [(swap.as_str(), 1u32), (in_lo.as_str(), 1)],
            )
            .transition(
                &name("t_restart", i),
                None,
                [(swap.as_str(), 1u32)],
                [(start_lo.as_str(), 1u32)],
            )
            .transition(
                &name("t_tmp", i),
                None,
                [(stop_lo.as_str(), 1u32)],
                [(tmp.as_str(), 1u32)],
            )
            .transition(
                &name("t_copy", i),
                None,
                [(tmp.as_str(), 1u32), (out_lo.as_str(), 1)],
                [(tmp.as_str(), 1u32), (out_hi.as_str(), 1)],
            )
            .transition(
                &name("t_stop", i),
                None,
                [(tmp.as_str(), 1u32)],
                [(stop_hi.as_str(), 1u32)],
            );
    }
    let out_top = name("out", n);
    b = b
        .place("final")
        .transition("t_final", Some("a"), [(out_top.as_str(), 1u32)], [("final", 1u32)]);
    let net = b.build().expect("generated net is well formed");
    let start_top = name("start", n);
    let in_top = name("in", n);
    let inst = NetInstance::with_named_markings(net, &[(start_top.as_str(), 1), (in_top.as_str(), x)], &[])
        .expect("declared places");
    Ok(inst)
}

/// `A_0(x) = x+1`, `A_{n+1}(0) = A_n(1)`, `A_{n+1}(x+1) = A_n(A_{n+1}(x))`.
pub fn ackermann_value(n: u32, x: u64) -> Result<BigUint, GeneratorError> {
    ackermann_guard(n, x)?;
    let mut memo = HashMap::new();
    Ok(ackermann_rec(n, BigUint::from(x), &mut memo))
}

fn ackermann_rec(n: u32, x: BigUint, memo: &mut HashMap<(u32, BigUint), BigUint>) -> BigUint {
    if n == 0 {
        return x + 1u32;
    }
    if let Some(v) = memo.get(&(n, x.clone())) {
        return v.clone();
    }
    // unfold A_n(x) = A_{n-1}^{x+1}(1)
    let steps = x.to_u64().expect("guarded argument");
    let mut v = BigUint::one();
    for _ in 0..=steps {
        v = ackermann_rec(n - 1, v, memo);
    }
    memo.insert((n, x), v.clone());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Word;
    use crate::reach::brute_force_language;
    use std::collections::BTreeSet;

    fn a_pow(k: usize) -> Word {
        Word::from_chars(&"a".repeat(k))
    }

    #[test]
    fn ackermann_values() {
        for x in 0..5u64 {
            assert_eq!(ackermann_value(0, x).unwrap(), BigUint::from(x + 1));
        }
        assert_eq!(ackermann_value(1, 0).unwrap(), BigUint::from(2u32));
        assert_eq!(ackermann_value(2, 2).unwrap(), BigUint::from(7u32));
        assert_eq!(ackermann_value(1, 1).unwrap(), BigUint::from(3u32));
        assert_eq!(ackermann_value(2, 1).unwrap(), BigUint::from(5u32));
        assert_eq!(ackermann_value(3, 1).unwrap(), BigUint::from(13u32));
        assert!(ackermann_value(3, 2).is_err());
        assert!(gen_ackermann(3, 2).is_err());
    }

    #[test]
    fn ackermann_smallest_languages() {
        let inst = gen_ackermann(0, 2).unwrap();
        let l = brute_force_language(&inst, 12);
        let expected: BTreeSet<Word> = (0..=3).map(a_pow).collect();
        assert_eq!(l, expected);
        let inst = gen_ackermann(1, 1).unwrap();
        let l = brute_force_language(&inst, 30);
        let expected: BTreeSet<Word> = (0..=3).map(a_pow).collect();
        assert_eq!(l, expected);
    }

    #[test]
    fn power_family_shapes() {
        let inst = gen_bpp_power(0);
        assert_eq!(brute_force_language(&inst, 4), BTreeSet::from([a_pow(1)]));
        let inst = gen_bpp_power(2);
        assert!(inst.net().is_bpp());
        assert_eq!(brute_force_language(&inst, 5), BTreeSet::from([a_pow(4)]));
    }

    #[test]
    fn rackoff_closed_form() {
        let inst = gen_rackoff_ce();
        let l = brute_force_language(&inst, 4);
        let mut expected = BTreeSet::new();
        for k in 1..=3 {
            expected.insert(Word::from_chars(&format!("{}b", "a".repeat(k))));
        }
        for k in 0..=3 {
            expected.insert(Word::from_chars(&format!("{}c", "a".repeat(k))));
        }
        assert_eq!(l, expected);
    }
}
