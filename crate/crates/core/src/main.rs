fn main() {
    std::process::exit(barylab::cli::main_with(std::env::args_os()));
}
