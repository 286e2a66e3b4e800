fn main() {
    std::process::exit(guidebench::cli::main_with_args(std::env::args_os()));
}
