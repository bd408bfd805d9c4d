//! Parse and typecheck a program, printing the main expression's type or
//! the diagnostics that reject it.
//!
//! Run with: cargo run --example check_program

use sfmj::{bind_class_table, check_program_spanned, parse_program};

const PROGRAM: &str = r#"
class Shop extends Object { Shop() { super(); } }
class Item extends Object {
  Item() { super(); }
  Item transaction(Shop s, Item i, Customer c) { return i; }
}
class Customer extends Object { Customer() { super(); } }

transaction(new Shop(), new Item(), new Customer())
"#;

// The same client call, but nobody declared a matching branch.
const BROKEN: &str = r#"
class Shop extends Object { Shop() { super(); } }
class Item extends Object { Item() { super(); } }
class Customer extends Object { Customer() { super(); } }

transaction(new Shop(), new Item(), new Customer())
"#;

fn check(label: &str, source: &str) {
    println!("--- {label} ---");
    let parsed = parse_program(source).expect("example parses");
    let table = bind_class_table(parsed.decls).expect("example binds");
    match check_program_spanned(&table, &parsed.main, Some(&parsed.spans)) {
        Ok(typed) => {
            println!("accepted: main expression has type {}", typed.main_type);
            for warning in &typed.warnings {
                println!("  {warning}");
            }
        }
        Err(diags) => {
            println!("rejected:");
            for d in diags {
                println!("  {d}");
            }
        }
    }
}

fn main() {
    check("transaction declared in Item", PROGRAM);
    check("transaction declared nowhere", BROKEN);
}
