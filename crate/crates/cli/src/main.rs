fn main() {
    std::process::exit(qtrace_cli::main_with_args(std::env::args_os()));
}
