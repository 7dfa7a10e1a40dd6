fn main() {
    std::process::exit(hall_mhd::cli::main_with_args(std::env::args_os()));
}
