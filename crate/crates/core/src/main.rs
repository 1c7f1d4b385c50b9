fn main() {
    std::process::exit(safebench::cli::main_with(std::env::args_os()));
}
