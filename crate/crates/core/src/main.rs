fn main() {
    std::process::exit(genoboost::cli::main());
}
