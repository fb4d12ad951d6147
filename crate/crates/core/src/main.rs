fn main() {
    std::process::exit(pf_forge::cli::main_with_args(std::env::args_os()));
}
