fn main() {
    std::process::exit(lola_cli::main_with(std::env::args_os()));
}
