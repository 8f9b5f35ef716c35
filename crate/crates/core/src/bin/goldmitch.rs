fn main() {
    std::process::exit(goldmitch::cli::main_with_env());
}
