//! The global well-formedness check at work: two branches that specialize
//! a shared method along different argument positions leave their meet
//! uncovered, and the whole program is rejected — even though each class
//! looks fine on its own. Implementing the meet restores acceptance.
//!
//! Run with: cargo run --example ambiguity_check

use sfmj::gen::oracle_ambiguity;
use sfmj::{bind_class_table, check_program, parse_program};

const AMBIGUOUS: &str = r#"
class A extends Object {
  A() { super(); }
  Object m(A a, B b) { return new Object(); }
}
class B extends Object { B() { super(); } }
class A1 extends A {
  A1() { super(); }
  A m(A1 a, B b) { return a; }
}
class B1 extends B {
  B1() { super(); }
  Object m(A a, B1 b) { return new Object(); }
}

m(new A1(), new B1())
"#;

// Identical, plus one branch at the meet (A1, B1).
const REPAIRED: &str = r#"
class A extends Object {
  A() { super(); }
  Object m(A a, B b) { return new Object(); }
}
class B extends Object { B() { super(); } }
class A1 extends A {
  A1() { super(); }
  A m(A1 a, B b) { return a; }
  A m(A1 a, B1 b) { return a; }
}
class B1 extends B {
  B1() { super(); }
  Object m(A a, B1 b) { return new Object(); }
}

m(new A1(), new B1())
"#;

fn main() {
    let parsed = parse_program(AMBIGUOUS).expect("parses");
    let table = bind_class_table(parsed.decls).expect("binds");

    println!("checker verdict on the crossing table:");
    match check_program(&table, &parsed.main) {
        Ok(_) => println!("  accepted (unexpected!)"),
        Err(diags) => {
            for d in diags {
                println!("  {d}");
            }
        }
    }

    println!("\nbrute-force enumeration finds the same conflict:");
    for report in oracle_ambiguity(&table) {
        let args: Vec<&str> = report.witness_args.iter().map(|c| c.as_str()).collect();
        println!(
            "  {}({}) has {} applicable branches and no most specific one",
            report.method,
            args.join(", "),
            report.candidates.len()
        );
    }

    let parsed = parse_program(REPAIRED).expect("parses");
    let table = bind_class_table(parsed.decls).expect("binds");
    println!("\nwith a branch at the meet (A1, B1):");
    match check_program(&table, &parsed.main) {
        Ok(typed) => println!("  accepted, main : {}", typed.main_type),
        Err(_) => println!("  still rejected (unexpected!)"),
    }
}
