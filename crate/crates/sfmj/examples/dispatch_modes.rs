//! Differential run of the two dispatch strategies on the method-relocation
//! scenario: the symmetric strategy finds the branch wherever it lives,
//! while first-argument lookup breaks as soon as the branch moves out of
//! the first argument's class.
//!
//! Run with: cargo run --example dispatch_modes

use sfmj::{
    bind_class_table, check_program, evaluate_with, fj_precheck, parse_program, DispatchStrategy,
    Outcome,
};

const PROGRAM: &str = r#"
class Shop extends Object { Shop() { super(); } }
class Item extends Object {
  Item() { super(); }
  Item transaction(Shop s, Item i, Customer c) { return i; }
}
class Customer extends Object { Customer() { super(); } }

transaction(new Shop(), new Item(), new Customer())
"#;

fn main() {
    let parsed = parse_program(PROGRAM).expect("parses");
    let table = bind_class_table(parsed.decls).expect("binds");
    check_program(&table, &parsed.main).expect("typechecks under the symmetric rules");

    println!("symmetric dispatch:");
    match evaluate_with(&table, DispatchStrategy::Sfmj, &parsed.main, 1_000) {
        Ok(trace) => match trace.outcome {
            Outcome::Value(v) => println!("  value: {v}"),
            other => println!("  {other:?}"),
        },
        Err(e) => println!("  error: {e}"),
    }

    println!("first-argument dispatch:");
    for diag in fj_precheck(&table, &parsed.main) {
        println!("  pre-run check: {diag}");
    }
    match evaluate_with(&table, DispatchStrategy::Fj, &parsed.main, 1_000) {
        Ok(trace) => println!("  unexpected success: {:?}", trace.outcome),
        Err(e) => println!("  dispatch failure: {e}"),
    }
}
