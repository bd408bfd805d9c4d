//! A quick empirical pass over the soundness properties: generate random
//! well-formed programs, run subject reduction and progress along their
//! traces, and cross-check the well-formedness verdict against brute-force
//! enumeration on unrestricted tables.
//!
//! Run with: cargo run --example random_soundness

use sfmj::gen::{checker_accepts, oracle_accepts, prop_progress, prop_subject_reduction};
use sfmj::{evaluate, gen_program, gen_table, GenConfig, Outcome, Verdict};

fn main() {
    std::thread::Builder::new()
        .stack_size(64 * 1024 * 1024)
        .spawn(run)
        .unwrap()
        .join()
        .unwrap();
}

fn run() {
    let seeds = 100u64;

    let mut values = 0usize;
    let mut stuck = 0usize;
    for seed in 0..seeds {
        let cfg = GenConfig {
            seed,
            allow_downcasts: seed % 2 == 0,
            ..Default::default()
        };
        let (table, main) = gen_program(&cfg);
        match prop_subject_reduction(&table, &main, 1_000) {
            Verdict::Pass => {}
            Verdict::Fail(detail) => panic!("subject reduction failed on seed {seed}: {detail}"),
        }
        match prop_progress(&table, &main, 1_000) {
            Verdict::Pass => {}
            Verdict::Fail(detail) => panic!("progress failed on seed {seed}: {detail}"),
        }
        match evaluate(&table, &main, 1_000)
            .expect("no internal failures")
            .outcome
        {
            Outcome::Value(_) => values += 1,
            Outcome::StuckCast(_) => stuck += 1,
            Outcome::FuelExhausted => {}
        }
    }
    println!("{seeds} well-formed programs: subject reduction and progress hold");
    println!("  outcomes: {values} values, {stuck} stuck downcasts");

    let mut agreements = 0usize;
    let mut rejected = 0usize;
    for seed in 0..seeds {
        let cfg = GenConfig {
            seed,
            ..Default::default()
        };
        let table = gen_table(&cfg);
        let checker = checker_accepts(&table);
        assert_eq!(
            checker,
            oracle_accepts(&table),
            "verdicts split on seed {seed}"
        );
        agreements += 1;
        if !checker {
            rejected += 1;
        }
    }
    println!("{agreements} unrestricted tables: checker and enumeration oracle agree");
    println!("  ({rejected} contained genuine dispatch ambiguities)");
}
