// Placeholder; the acceptance suite lands after the unit build is green.
int main() { return 0; }
