fn main() {
    std::process::exit(rrq::cli::main());
}
