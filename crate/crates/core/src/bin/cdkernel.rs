fn main() {
    std::process::exit(cdkernel::cli::main_with_args(std::env::args_os()));
}
