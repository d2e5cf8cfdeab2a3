fn main() {
    std::process::exit(mkp_core::cli::main_with_args(std::env::args_os()));
}
