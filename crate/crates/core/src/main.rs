fn main() {
    let code = wirefish_core::cli::run(std::env::args().collect());
    std::process::exit(code);
}
