#include <cstdio>
int main(){ std::puts("perfhom"); return 0; }
