fn main() {
    std::process::exit(procova::cli::main_with_args(std::env::args_os()));
}
