fn main() {
    std::process::exit(ima_lab::cli::main_with_args(std::env::args_os()));
}
