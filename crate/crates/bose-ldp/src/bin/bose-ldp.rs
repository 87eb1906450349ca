fn main() {
    std::process::exit(bose_ldp::cli::run(std::env::args()));
}
