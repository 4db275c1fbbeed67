fn main() {
    std::process::exit(can_core::pipeline::cli::main_with_args(std::env::args_os()));
}
