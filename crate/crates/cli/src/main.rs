fn main() {
    let code = envwit_cli::run(std::env::args_os());
    std::process::exit(code);
}
