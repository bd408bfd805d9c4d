//! Parse a program, print it back, and parse the output again: the two
//! syntax trees are structurally identical.
//!
//! Run with: cargo run --example pretty_roundtrip

use sfmj::{parse_program, pretty_program};

const PROGRAM: &str = r#"
// comments and layout vanish; structure survives
class A extends Object { A() { super(); } }
class B extends Object { B() { super(); } }
class Pair extends Object {
  A fst; B snd;
  Pair(A fst, B snd) { super(); this.fst = fst; this.snd = snd; }
  A pick(Pair p, B b) { return p.fst; }
}

pick(new Pair(new A(), new B()), (B) new Pair(new A(), new B()).snd)
"#;

fn main() {
    let parsed = parse_program(PROGRAM).expect("parses");
    let printed = pretty_program(&parsed.decls, &parsed.main);
    println!("{printed}");

    let reparsed = parse_program(&printed).expect("printer output parses");
    assert_eq!(parsed.decls, reparsed.decls);
    assert_eq!(parsed.main, reparsed.main);
    println!("round-trip: structurally identical");
}
