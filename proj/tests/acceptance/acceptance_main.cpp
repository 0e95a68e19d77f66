// placeholder so the target links while the suite is being written
#include <cstdio>
int main() { std::puts("acceptance suite not yet implemented"); return 1; }
