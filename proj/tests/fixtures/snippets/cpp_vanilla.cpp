static string encryptMessage(const string& message, const string& key) {
    string encrypted;
    for (size_t i = 0; i < message.length(); i++) {
        char c = message[i];
        char k = key[i % key.length()];
        encrypted += static_cast<char>(c + k);
    }
    return encrypted;
}
