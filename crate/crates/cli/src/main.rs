fn main() {
    std::process::exit(dafi_cli::main_with_args(std::env::args_os()));
}
