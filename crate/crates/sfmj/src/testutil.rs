//! Shared fixtures for unit tests.

use crate::ast::{ClassName, Expr};
use crate::parser::parse_program;
use crate::table::{bind_class_table, ClassTable, TableError};

pub(crate) fn cn(name: &str) -> ClassName {
    ClassName::new(name)
}

/// Runs a closure on a thread with a large stack. Long reduction sequences
/// over generated programs can nest congruence contexts thousands deep, and
/// the stepper recurses along that path.
pub(crate) fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(256 * 1024 * 1024)
        .spawn(f)
        .expect("spawn test thread")
        .join()
        .expect("test thread panicked")
}

/// Parses and binds the class declarations of a program source.
pub(crate) fn table(src: &str) -> ClassTable {
    try_table(src).expect("fixture binds")
}

pub(crate) fn try_table(src: &str) -> Result<ClassTable, TableError> {
    let parsed = parse_program(src).expect("fixture parses");
    bind_class_table(parsed.decls)
}

/// Parses a program into (table, main, spans are dropped).
pub(crate) fn program(src: &str) -> (ClassTable, Expr, crate::span::SpanMap) {
    let parsed = parse_program(src).expect("fixture parses");
    let ct = bind_class_table(parsed.decls).expect("fixture binds");
    (ct, parsed.main, parsed.spans)
}

/// The four-class crossing table: two branches specialize `A.m(A, B)` along
/// different argument positions, leaving the meet (A1, B1) uncovered.
pub(crate) fn ct1() -> ClassTable {
    table(
        "class A extends Object {
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
         new Object()",
    )
}

/// `ct1` plus the branch at the meet, which restores well-formedness.
pub(crate) fn ct1_with_meet() -> ClassTable {
    table(
        "class A extends Object {
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
         new Object()",
    )
}

/// Shop/Item/Customer with the transaction branch owned by Item and a
/// CharityShop override: the override-across-hierarchies scenario.
pub(crate) fn ct2() -> ClassTable {
    table(
        "class Shop extends Object { Shop() { super(); } }
         class CharityShop extends Shop {
           CharityShop() { super(); }
           Item transaction(CharityShop cs, Item i, Customer c) { return i; }
         }
         class Item extends Object {
           Item() { super(); }
           Item transaction(Shop s, Item i, Customer c) { return i; }
         }
         class Customer extends Object { Customer() { super(); } }
         new Object()",
    )
}

/// Shop/Item/Customer with only the Item-owned branch: typable under
/// symmetric dispatch, invisible to first-argument lookup from Shop.
pub(crate) fn shop_in_item() -> ClassTable {
    table(
        "class Shop extends Object { Shop() { super(); } }
         class Item extends Object {
           Item() { super(); }
           Item transaction(Shop s, Item i, Customer c) { return i; }
         }
         class Customer extends Object { Customer() { super(); } }
         new Object()",
    )
}

/// Pair with two fields over marker classes A and B.
pub(crate) fn pair_table() -> ClassTable {
    table(
        "class A extends Object { A() { super(); } }
         class B extends Object { B() { super(); } }
         class Pair extends Object {
           A fst;
           B snd;
           Pair(A fst, B snd) { super(); this.fst = fst; this.snd = snd; }
         }
         new Object()",
    )
}
