fn main() {
    std::process::exit(randclt::cli::main_with_args(std::env::args_os()));
}
