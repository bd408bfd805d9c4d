//! Small-step evaluation with a rule-by-rule trace. The interesting line is
//! the `R-Invk`: dispatch uses the run-time classes of all arguments, so
//! the CharityShop branch fires even though the argument's static type is
//! plain Shop.
//!
//! Run with: cargo run --example run_trace

use sfmj::{bind_class_table, check_program, evaluate, parse_program, Outcome};

const PROGRAM: &str = r#"
class Shop extends Object { Shop() { super(); } }
class CharityShop extends Shop {
  CharityShop() { super(); }
  Item transaction(CharityShop cs, Item i, Customer c) { return i; }
}
class Item extends Object {
  Item() { super(); }
  Item transaction(Shop s, Item i, Customer c) { return i; }
}
class Customer extends Object { Customer() { super(); } }

transaction((Shop) new CharityShop(), new Item(), new Customer())
"#;

fn main() {
    let parsed = parse_program(PROGRAM).expect("parses");
    let table = bind_class_table(parsed.decls).expect("binds");
    let typed = check_program(&table, &parsed.main).expect("typechecks");
    println!("main : {}", typed.main_type);
    println!("  {}", parsed.main);

    let trace = evaluate(&table, &parsed.main, 1_000).expect("evaluates");
    for (idx, (expr, rule)) in trace.steps.iter().enumerate() {
        println!("{:>2} {rule:<32} {expr}", idx + 1);
    }
    match trace.outcome {
        Outcome::Value(v) => println!("value: {v}"),
        Outcome::StuckCast(e) => println!("stuck: {e}"),
        Outcome::FuelExhausted => println!("fuel exhausted"),
    }
}
