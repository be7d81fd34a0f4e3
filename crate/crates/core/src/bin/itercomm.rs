fn main() {
    std::process::exit(itercomm::cli::main_with_args(std::env::args_os()));
}
