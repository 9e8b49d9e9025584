fn main() {
    std::process::exit(dubrovin::cli::main_with_args(std::env::args_os()));
}
