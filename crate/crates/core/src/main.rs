fn main() {
    let code = besovlab::cli::main_with(std::env::args().skip(1), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
