fn main() {
    std::process::exit(sparsetopic::cli::main())
}
