fn main() {
    std::process::exit(medsr::cli::main());
}
