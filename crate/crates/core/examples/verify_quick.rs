//! The solver-only acceptance criteria (1-5) as a table.

fn main() {
    let summary = pmefront::verify::run(true, false);
    print!("{}", summary.table());
    if !summary.passed {
        std::process::exit(1);
    }
}
