fn main() {
    std::process::exit(pmefront::cli::main());
}
