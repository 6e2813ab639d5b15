fn main() {
    let code = storyloop::cli::run(std::env::args_os());
    std::process::exit(code);
}
