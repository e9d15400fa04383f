fn main() -> std::process::ExitCode {
    dilative::cli::main_entry()
}
