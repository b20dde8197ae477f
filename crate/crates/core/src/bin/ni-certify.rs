fn main() {
    let (code, _) = ni_converse::cli::run(std::env::args_os());
    std::process::exit(code);
}
