struct Token {
    const Token* nextArgument() const;
    const Token* next() const;
    int varId() const;
    void str() const;};
void f(const Token *first) {
    first = first->nextArgument();
    if (first)
        first = first->next();
    first->str();
}
