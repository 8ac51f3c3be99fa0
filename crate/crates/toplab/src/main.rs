fn main() {
    std::process::exit(toplab::cli::main_with_args(std::env::args_os()));
}
