fn main() {
    std::process::exit(boolrv::cli::main_with_args(std::env::args_os()));
}
