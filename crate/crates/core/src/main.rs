fn main() {
    std::process::exit(uncsens::cli::main_with_args(std::env::args_os()));
}
