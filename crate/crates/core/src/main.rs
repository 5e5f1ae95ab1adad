fn main() {
    std::process::exit(rmf_lab::cli::main_with_args(std::env::args_os()));
}
