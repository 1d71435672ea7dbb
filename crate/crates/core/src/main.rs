fn main() {
    let code = nodal_lab::cli::run(std::env::args_os());
    std::process::exit(code);
}
